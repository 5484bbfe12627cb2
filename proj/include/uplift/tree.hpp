#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "uplift/dataset.hpp"
#include "uplift/estimators.hpp"

namespace uplift {

/// Split quality measure. The divergence criteria score the distance between
/// the treated and control outcome distributions, summarized by the indicator
/// 1[y < outcome_threshold]; leaf_mse scores the within-leaf squared error
/// after virtually splitting each child by treatment.
enum class SplitCriterion { divergence_abs_p, divergence_kl, divergence_euclid, leaf_mse };

SplitCriterion split_criterion_from_string(const std::string& name);
std::string to_string(SplitCriterion kind);

struct TreeConfig {
  SplitCriterion criterion = SplitCriterion::divergence_euclid;
  double outcome_threshold = 0.0;
  Eigen::Index min_leaf_per_arm = 10;
  int max_depth = 6;
  bool honest = false;
  bool laplace_smoothing = true;
  std::uint64_t seed = 0;
};

struct LeafStats {
  Eigen::Index n_treated = 0;
  Eigen::Index n_control = 0;
  double mean_treated = 0.0;
  double mean_control = 0.0;
  double var_treated = 0.0;   // unbiased; 0 when an arm has a single row
  double var_control = 0.0;
  double tau_hat = 0.0;

  /// Welch t-statistic of the arm-mean difference.
  double t_statistic() const;
};

/// Internal nodes route rows with x[feature] < threshold to `left`; leaves
/// carry per-arm statistics and the effect estimate.
struct TreeNode {
  bool is_leaf = true;
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  LeafStats stats;
};

class UpliftTree : public UpliftEstimator {
 public:
  UpliftTree(TreeConfig config, std::vector<std::string> feature_names,
             std::vector<TreeNode> nodes);

  const std::string& method() const override { return method_; }
  const std::vector<std::string>& feature_names() const override { return feature_names_; }
  Eigen::VectorXd predict_tau(const Eigen::MatrixXd& features) const override;
  nlohmann::json to_json() const override;

  const TreeConfig& config() const { return config_; }
  const std::vector<TreeNode>& nodes() const { return nodes_; }
  const TreeNode& root() const { return nodes_[0]; }
  Eigen::Index leaf_count() const;
  double predict_row(const Eigen::RowVectorXd& x) const;

  static UpliftTree from_json(const nlohmann::json& doc);

 private:
  TreeConfig config_;
  std::vector<std::string> feature_names_;
  std::vector<TreeNode> nodes_;
  std::string method_ = "tree";
};

/// Distance between the arms' outcome distributions through the share of
/// outcomes below `outcome_threshold` (Laplace-smoothed when requested).
double arm_distance(std::span<const double> treated, std::span<const double> control,
                    SplitCriterion kind, double outcome_threshold, bool laplace_smoothing);

/// Q(split) for an explicit row partition of a node. Divergence criteria
/// return the size-weighted child distances minus the parent distance;
/// leaf_mse returns the negated size-weighted within-leaf MSE, so larger is
/// better for every criterion. A child violating min_leaf_per_arm makes the
/// split invalid (nullopt), not an error.
std::optional<double> split_gain(const Dataset& ds, std::span<const Eigen::Index> left_rows,
                                 std::span<const Eigen::Index> right_rows,
                                 const TreeConfig& config);

/// Greedy recursive partitioning over all features and all midpoints between
/// consecutive distinct sorted values. With honest estimation the rows are
/// first split 50/50 (seeded) into a structure half that drives the splits
/// and an estimation half that populates the leaf statistics.
UpliftTree build_tree(const Dataset& ds, const TreeConfig& config);

struct SubgroupCondition {
  int feature = -1;
  double lower = 0.0;  // inclusive
  double upper = 0.0;  // exclusive
};

/// A leaf with a significantly positive effect, described by the conjunction
/// of interval conditions along its root-to-leaf path.
struct SubgroupRule {
  std::vector<SubgroupCondition> conditions;
  LeafStats stats;
};

std::vector<SubgroupRule> extract_rules(const UpliftTree& tree, double min_t_stat);

}  // namespace uplift
