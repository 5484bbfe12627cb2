#pragma once

#include <memory>
#include <string>

#include "json.hpp"
#include "uplift/estimators.hpp"

namespace uplift {

/// Dispatches on the document's method tag (linear forms, tree, forest).
std::unique_ptr<UpliftEstimator> estimator_from_json(const nlohmann::json& doc);

std::unique_ptr<UpliftEstimator> load_model(const std::string& path);
void save_model(const UpliftEstimator& model, const std::string& path);

}  // namespace uplift
