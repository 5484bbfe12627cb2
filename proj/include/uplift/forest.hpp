#pragma once

#include <cstdint>
#include <vector>

#include "uplift/dataset.hpp"
#include "uplift/tree.hpp"

namespace uplift {

struct ForestConfig {
  Eigen::Index n_trees = 100;
  double row_fraction = 1.0;
  double feature_fraction = 1.0;
  bool with_replacement = true;
  std::uint64_t seed = 0;
  TreeConfig tree;
};

/// Bagged ensemble of uplift trees built on independently seeded row and
/// feature subsamples; the prediction is the unweighted mean over the trees
/// actually built.
class UpliftForest : public UpliftEstimator {
 public:
  UpliftForest(ForestConfig config, std::vector<std::string> feature_names,
               std::vector<UpliftTree> trees, Eigen::Index skipped_trees);

  const std::string& method() const override { return method_; }
  const std::vector<std::string>& feature_names() const override { return feature_names_; }
  Eigen::VectorXd predict_tau(const Eigen::MatrixXd& features) const override;
  nlohmann::json to_json() const override;

  const ForestConfig& config() const { return config_; }
  const std::vector<UpliftTree>& trees() const { return trees_; }
  Eigen::Index skipped_trees() const { return skipped_trees_; }

  static UpliftForest from_json(const nlohmann::json& doc);

 private:
  ForestConfig config_;
  std::vector<std::string> feature_names_;
  std::vector<UpliftTree> trees_;
  Eigen::Index skipped_trees_ = 0;
  std::string method_ = "forest";
};

UpliftForest build_forest(const Dataset& ds, const ForestConfig& config);

}  // namespace uplift
