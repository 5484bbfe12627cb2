#include "uplift/model_io.hpp"

#include <stdexcept>

#include "uplift/forest.hpp"
#include "uplift/text.hpp"
#include "uplift/tree.hpp"

namespace uplift {

using nlohmann::json;

std::unique_ptr<UpliftEstimator> estimator_from_json(const json& doc) {
  const std::string method = doc.at("method").get<std::string>();
  if (method == "tree") return std::make_unique<UpliftTree>(UpliftTree::from_json(doc));
  if (method == "forest") return std::make_unique<UpliftForest>(UpliftForest::from_json(doc));
  return linear_estimator_from_json(doc);
}

std::unique_ptr<UpliftEstimator> load_model(const std::string& path) {
  return estimator_from_json(json::parse(read_file(path)));
}

void save_model(const UpliftEstimator& model, const std::string& path) {
  write_file_atomic(path, model.to_json().dump(2) + "\n");
}

}  // namespace uplift
