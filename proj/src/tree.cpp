#include "uplift/tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "uplift/rng.hpp"

namespace uplift {

using nlohmann::json;

SplitCriterion split_criterion_from_string(const std::string& name) {
  if (name == "divergence_abs_p") return SplitCriterion::divergence_abs_p;
  if (name == "divergence_kl") return SplitCriterion::divergence_kl;
  if (name == "divergence_euclid") return SplitCriterion::divergence_euclid;
  if (name == "leaf_mse") return SplitCriterion::leaf_mse;
  throw std::invalid_argument("unknown split criterion '" + name + "'");
}

std::string to_string(SplitCriterion kind) {
  switch (kind) {
    case SplitCriterion::divergence_abs_p: return "divergence_abs_p";
    case SplitCriterion::divergence_kl: return "divergence_kl";
    case SplitCriterion::divergence_euclid: return "divergence_euclid";
    case SplitCriterion::leaf_mse: return "leaf_mse";
  }
  throw std::invalid_argument("unknown split criterion");
}

double LeafStats::t_statistic() const {
  const double se2 = var_treated / static_cast<double>(n_treated) +
                     var_control / static_cast<double>(n_control);
  return tau_hat / std::sqrt(se2);
}

namespace {

struct ArmAgg {
  Eigen::Index n = 0;
  Eigen::Index below = 0;  // outcomes < outcome_threshold
  double sum = 0.0;
  double sumsq = 0.0;

  void add(double y, bool is_below) {
    ++n;
    below += is_below ? 1 : 0;
    sum += y;
    sumsq += y * y;
  }
};

double indicator_share(Eigen::Index below, Eigen::Index n, bool laplace) {
  if (laplace) return (static_cast<double>(below) + 1.0) / (static_cast<double>(n) + 2.0);
  return static_cast<double>(below) / static_cast<double>(n);
}

double kl_term(double p, double q) {
  if (p == 0.0) return 0.0;
  if (q == 0.0) return std::numeric_limits<double>::infinity();
  return p * std::log(p / q);
}

double distance_from_counts(Eigen::Index below_t, Eigen::Index n_t, Eigen::Index below_c,
                            Eigen::Index n_c, SplitCriterion kind, bool laplace) {
  const double p1 = indicator_share(below_t, n_t, laplace);
  const double p0 = indicator_share(below_c, n_c, laplace);
  switch (kind) {
    case SplitCriterion::divergence_abs_p:
      return std::abs(p1 - p0);
    case SplitCriterion::divergence_kl:
      return kl_term(p1, p0) + kl_term(1.0 - p1, 1.0 - p0);
    case SplitCriterion::divergence_euclid:
      return (p1 - p0) * (p1 - p0) + ((1.0 - p1) - (1.0 - p0)) * ((1.0 - p1) - (1.0 - p0));
    case SplitCriterion::leaf_mse:
      break;
  }
  throw std::invalid_argument("distance is defined for divergence criteria only");
}

// n * MSE of a virtual leaf, from its aggregates.
double scaled_mse(const ArmAgg& a) {
  if (a.n == 0) return 0.0;
  return a.sumsq - a.sum * a.sum / static_cast<double>(a.n);
}

// Size-weighted mean of within-virtual-leaf MSE over one node.
double node_mse_value(const ArmAgg& t, const ArmAgg& c) {
  return (scaled_mse(t) + scaled_mse(c)) / static_cast<double>(t.n + c.n);
}

struct NodeAgg {
  ArmAgg treated;
  ArmAgg control;

  Eigen::Index n() const { return treated.n + control.n; }
  bool admissible(Eigen::Index min_leaf) const {
    return treated.n >= min_leaf && control.n >= min_leaf;
  }
};

NodeAgg aggregate(const Dataset& ds, std::span<const Eigen::Index> rows, double theta) {
  NodeAgg agg;
  for (Eigen::Index r : rows) {
    const double y = ds.outcome()[r];
    (ds.treatment()[r] == 1 ? agg.treated : agg.control).add(y, y < theta);
  }
  return agg;
}

double divergence(const NodeAgg& agg, SplitCriterion kind, bool laplace) {
  return distance_from_counts(agg.treated.below, agg.treated.n, agg.control.below, agg.control.n,
                              kind, laplace);
}

double gain_from_children(const NodeAgg& parent, const NodeAgg& left, const NodeAgg& right,
                          const TreeConfig& config) {
  const double n = static_cast<double>(parent.n());
  if (config.criterion == SplitCriterion::leaf_mse) {
    return -(scaled_mse(left.treated) + scaled_mse(left.control) + scaled_mse(right.treated) +
             scaled_mse(right.control)) /
           n;
  }
  const double d_parent = divergence(parent, config.criterion, config.laplace_smoothing);
  const double d_left = divergence(left, config.criterion, config.laplace_smoothing);
  const double d_right = divergence(right, config.criterion, config.laplace_smoothing);
  const double wl = static_cast<double>(left.n()) / n;
  const double wr = static_cast<double>(right.n()) / n;
  return wl * d_left + wr * d_right - d_parent;
}

LeafStats leaf_stats(const Dataset& ds, std::span<const Eigen::Index> rows) {
  LeafStats stats;
  double sum_t = 0.0, sum_c = 0.0;
  for (Eigen::Index r : rows) {
    if (ds.treatment()[r] == 1) {
      ++stats.n_treated;
      sum_t += ds.outcome()[r];
    } else {
      ++stats.n_control;
      sum_c += ds.outcome()[r];
    }
  }
  stats.mean_treated = sum_t / static_cast<double>(stats.n_treated);
  stats.mean_control = sum_c / static_cast<double>(stats.n_control);
  stats.tau_hat = stats.mean_treated - stats.mean_control;
  double ss_t = 0.0, ss_c = 0.0;
  for (Eigen::Index r : rows) {
    const double y = ds.outcome()[r];
    if (ds.treatment()[r] == 1)
      ss_t += (y - stats.mean_treated) * (y - stats.mean_treated);
    else
      ss_c += (y - stats.mean_control) * (y - stats.mean_control);
  }
  stats.var_treated = stats.n_treated > 1 ? ss_t / static_cast<double>(stats.n_treated - 1) : 0.0;
  stats.var_control = stats.n_control > 1 ? ss_c / static_cast<double>(stats.n_control - 1) : 0.0;
  return stats;
}

struct CandidateSplit {
  int feature = -1;
  double threshold = 0.0;
  double gain = -std::numeric_limits<double>::infinity();
  bool found = false;
};

struct Builder {
  const Dataset& ds;
  const TreeConfig& config;
  std::vector<TreeNode> nodes;

  // Best split over all features and all midpoints between consecutive
  // distinct sorted values, scanned with prefix aggregates. Ties in gain keep
  // the first candidate, i.e. the lower feature index, then lower threshold.
  CandidateSplit best_split(const std::vector<Eigen::Index>& rows,
                            const std::vector<Eigen::Index>& est_rows) const {
    const NodeAgg parent = aggregate(ds, rows, config.outcome_threshold);
    NodeAgg est_total;
    if (config.honest) est_total = aggregate(ds, est_rows, config.outcome_threshold);
    CandidateSplit best;
    std::vector<std::pair<double, Eigen::Index>> sorted(rows.size());

    for (int j = 0; j < static_cast<int>(ds.num_features()); ++j) {
      for (size_t i = 0; i < rows.size(); ++i)
        sorted[i] = {ds.features()(rows[i], j), rows[i]};
      std::sort(sorted.begin(), sorted.end());

      NodeAgg left;
      size_t est_ptr = 0;
      Eigen::Index est_left_t = 0, est_left_c = 0;
      std::vector<std::pair<double, int>> est_sorted;  // (value, treatment)
      if (config.honest) {
        est_sorted.reserve(est_rows.size());
        for (Eigen::Index r : est_rows)
          est_sorted.emplace_back(ds.features()(r, j), ds.treatment()[r]);
        std::sort(est_sorted.begin(), est_sorted.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
      }

      for (size_t i = 0; i + 1 < sorted.size(); ++i) {
        const Eigen::Index r = sorted[i].second;
        const double y = ds.outcome()[r];
        (ds.treatment()[r] == 1 ? left.treated : left.control)
            .add(y, y < config.outcome_threshold);
        if (sorted[i].first == sorted[i + 1].first) continue;
        const double threshold = 0.5 * (sorted[i].first + sorted[i + 1].first);

        NodeAgg right;
        right.treated.n = parent.treated.n - left.treated.n;
        right.treated.below = parent.treated.below - left.treated.below;
        right.treated.sum = parent.treated.sum - left.treated.sum;
        right.treated.sumsq = parent.treated.sumsq - left.treated.sumsq;
        right.control.n = parent.control.n - left.control.n;
        right.control.below = parent.control.below - left.control.below;
        right.control.sum = parent.control.sum - left.control.sum;
        right.control.sumsq = parent.control.sumsq - left.control.sumsq;

        if (!left.admissible(config.min_leaf_per_arm) ||
            !right.admissible(config.min_leaf_per_arm))
          continue;
        if (config.honest) {
          while (est_ptr < est_sorted.size() && est_sorted[est_ptr].first < threshold) {
            (est_sorted[est_ptr].second == 1 ? est_left_t : est_left_c) += 1;
            ++est_ptr;
          }
          const Eigen::Index est_right_t = est_total.treated.n - est_left_t;
          const Eigen::Index est_right_c = est_total.control.n - est_left_c;
          if (est_left_t < config.min_leaf_per_arm || est_left_c < config.min_leaf_per_arm ||
              est_right_t < config.min_leaf_per_arm || est_right_c < config.min_leaf_per_arm)
            continue;
        }

        const double gain = gain_from_children(parent, left, right, config);
        if (gain > best.gain) {
          best.feature = j;
          best.threshold = threshold;
          best.gain = gain;
          best.found = true;
        }
      }
    }
    return best;
  }

  bool accept(const CandidateSplit& split, const std::vector<Eigen::Index>& rows) const {
    if (!split.found) return false;
    if (config.criterion == SplitCriterion::leaf_mse) {
      const NodeAgg parent = aggregate(ds, rows, config.outcome_threshold);
      return split.gain > -node_mse_value(parent.treated, parent.control);
    }
    return split.gain > 0.0;
  }

  int grow(std::vector<Eigen::Index> rows, std::vector<Eigen::Index> est_rows, int depth) {
    const int index = static_cast<int>(nodes.size());
    nodes.emplace_back();

    CandidateSplit split;
    if (depth < config.max_depth) split = best_split(rows, est_rows);
    if (depth < config.max_depth && accept(split, rows)) {
      std::vector<Eigen::Index> left_rows, right_rows, est_left, est_right;
      for (Eigen::Index r : rows)
        (ds.features()(r, split.feature) < split.threshold ? left_rows : right_rows).push_back(r);
      for (Eigen::Index r : est_rows)
        (ds.features()(r, split.feature) < split.threshold ? est_left : est_right).push_back(r);
      nodes[index].is_leaf = false;
      nodes[index].feature = split.feature;
      nodes[index].threshold = split.threshold;
      const int left = grow(std::move(left_rows), std::move(est_left), depth + 1);
      const int right = grow(std::move(right_rows), std::move(est_right), depth + 1);
      nodes[index].left = left;
      nodes[index].right = right;
    } else {
      const std::vector<Eigen::Index>& stat_rows = config.honest ? est_rows : rows;
      nodes[index].is_leaf = true;
      nodes[index].stats = leaf_stats(ds, stat_rows);
    }
    return index;
  }
};

}  // namespace

double arm_distance(std::span<const double> treated, std::span<const double> control,
                    SplitCriterion kind, double outcome_threshold, bool laplace_smoothing) {
  if (treated.empty() || control.empty())
    throw std::invalid_argument("arm_distance requires both arms non-empty");
  Eigen::Index below_t = 0, below_c = 0;
  for (double y : treated) below_t += y < outcome_threshold ? 1 : 0;
  for (double y : control) below_c += y < outcome_threshold ? 1 : 0;
  return distance_from_counts(below_t, static_cast<Eigen::Index>(treated.size()), below_c,
                              static_cast<Eigen::Index>(control.size()), kind, laplace_smoothing);
}

std::optional<double> split_gain(const Dataset& ds, std::span<const Eigen::Index> left_rows,
                                 std::span<const Eigen::Index> right_rows,
                                 const TreeConfig& config) {
  const NodeAgg left = aggregate(ds, left_rows, config.outcome_threshold);
  const NodeAgg right = aggregate(ds, right_rows, config.outcome_threshold);
  if (!left.admissible(config.min_leaf_per_arm) || !right.admissible(config.min_leaf_per_arm))
    return std::nullopt;
  NodeAgg parent;
  parent.treated.n = left.treated.n + right.treated.n;
  parent.treated.below = left.treated.below + right.treated.below;
  parent.treated.sum = left.treated.sum + right.treated.sum;
  parent.treated.sumsq = left.treated.sumsq + right.treated.sumsq;
  parent.control.n = left.control.n + right.control.n;
  parent.control.below = left.control.below + right.control.below;
  parent.control.sum = left.control.sum + right.control.sum;
  parent.control.sumsq = left.control.sumsq + right.control.sumsq;
  return gain_from_children(parent, left, right, config);
}

UpliftTree build_tree(const Dataset& ds, const TreeConfig& config) {
  if (config.min_leaf_per_arm < 1) throw std::invalid_argument("min_leaf_per_arm must be >= 1");
  if (config.max_depth < 1) throw std::invalid_argument("max_depth must be >= 1");
  if (ds.n_treated() < 2 * config.min_leaf_per_arm ||
      ds.n_control() < 2 * config.min_leaf_per_arm)
    throw std::runtime_error("both arms must hold at least 2 * min_leaf_per_arm rows");

  std::vector<Eigen::Index> rows(static_cast<size_t>(ds.n()));
  std::iota(rows.begin(), rows.end(), Eigen::Index{0});
  std::vector<Eigen::Index> est_rows;
  if (config.honest) {
    Rng rng(config.seed);
    for (Eigen::Index i = ds.n() - 1; i > 0; --i) {
      const auto j = static_cast<Eigen::Index>(draw_below(rng, static_cast<std::uint64_t>(i) + 1));
      std::swap(rows[i], rows[j]);
    }
    const size_t half = rows.size() / 2;
    est_rows.assign(rows.begin() + half, rows.end());
    rows.resize(half);
    std::sort(rows.begin(), rows.end());
    std::sort(est_rows.begin(), est_rows.end());
    const NodeAgg s = aggregate(ds, rows, config.outcome_threshold);
    const NodeAgg e = aggregate(ds, est_rows, config.outcome_threshold);
    if (!s.admissible(config.min_leaf_per_arm) || !e.admissible(config.min_leaf_per_arm))
      throw std::runtime_error("honest halves do not retain min_leaf_per_arm per arm");
  }

  Builder builder{ds, config, {}};
  builder.grow(std::move(rows), std::move(est_rows), 1);
  return UpliftTree(config, ds.feature_names(), std::move(builder.nodes));
}

UpliftTree::UpliftTree(TreeConfig config, std::vector<std::string> feature_names,
                       std::vector<TreeNode> nodes)
    : config_(config), feature_names_(std::move(feature_names)), nodes_(std::move(nodes)) {
  if (nodes_.empty()) throw std::invalid_argument("tree needs at least one node");
}

double UpliftTree::predict_row(const Eigen::RowVectorXd& x) const {
  if (x.size() != static_cast<Eigen::Index>(feature_names_.size()))
    throw std::invalid_argument("feature count does not match tree");
  int at = 0;
  while (!nodes_[at].is_leaf)
    at = x[nodes_[at].feature] < nodes_[at].threshold ? nodes_[at].left : nodes_[at].right;
  return nodes_[at].stats.tau_hat;
}

Eigen::VectorXd UpliftTree::predict_tau(const Eigen::MatrixXd& features) const {
  Eigen::VectorXd out(features.rows());
  for (Eigen::Index i = 0; i < features.rows(); ++i) out[i] = predict_row(features.row(i));
  return out;
}

Eigen::Index UpliftTree::leaf_count() const {
  Eigen::Index count = 0;
  for (const auto& node : nodes_) count += node.is_leaf ? 1 : 0;
  return count;
}

namespace {

json node_to_json(const std::vector<TreeNode>& nodes, int index) {
  const TreeNode& node = nodes[index];
  if (node.is_leaf) {
    return json{{"n_treated", node.stats.n_treated},
                {"n_control", node.stats.n_control},
                {"mean_treated", node.stats.mean_treated},
                {"mean_control", node.stats.mean_control},
                {"var_treated", node.stats.var_treated},
                {"var_control", node.stats.var_control},
                {"tau_hat", node.stats.tau_hat}};
  }
  json doc;
  doc["feature"] = node.feature;
  doc["threshold"] = node.threshold;
  doc["left"] = node_to_json(nodes, node.left);
  doc["right"] = node_to_json(nodes, node.right);
  return doc;
}

int node_from_json(const json& doc, std::vector<TreeNode>& nodes) {
  const int index = static_cast<int>(nodes.size());
  nodes.emplace_back();
  if (doc.contains("feature")) {
    nodes[index].is_leaf = false;
    nodes[index].feature = doc.at("feature").get<int>();
    nodes[index].threshold = doc.at("threshold").get<double>();
    const int left = node_from_json(doc.at("left"), nodes);
    const int right = node_from_json(doc.at("right"), nodes);
    nodes[index].left = left;
    nodes[index].right = right;
  } else {
    LeafStats& stats = nodes[index].stats;
    stats.n_treated = doc.at("n_treated").get<Eigen::Index>();
    stats.n_control = doc.at("n_control").get<Eigen::Index>();
    stats.mean_treated = doc.at("mean_treated").get<double>();
    stats.mean_control = doc.at("mean_control").get<double>();
    stats.var_treated = doc.at("var_treated").get<double>();
    stats.var_control = doc.at("var_control").get<double>();
    stats.tau_hat = doc.at("tau_hat").get<double>();
  }
  return index;
}

json config_to_json(const TreeConfig& config) {
  return json{{"criterion", to_string(config.criterion)},
              {"outcome_threshold", config.outcome_threshold},
              {"min_leaf_per_arm", config.min_leaf_per_arm},
              {"max_depth", config.max_depth},
              {"honest", config.honest},
              {"laplace_smoothing", config.laplace_smoothing},
              {"seed", config.seed}};
}

TreeConfig config_from_json(const json& doc) {
  TreeConfig config;
  config.criterion = split_criterion_from_string(doc.at("criterion").get<std::string>());
  config.outcome_threshold = doc.at("outcome_threshold").get<double>();
  config.min_leaf_per_arm = doc.at("min_leaf_per_arm").get<Eigen::Index>();
  config.max_depth = doc.at("max_depth").get<int>();
  config.honest = doc.at("honest").get<bool>();
  config.laplace_smoothing = doc.at("laplace_smoothing").get<bool>();
  config.seed = doc.at("seed").get<std::uint64_t>();
  return config;
}

}  // namespace

json UpliftTree::to_json() const {
  json doc;
  doc["method"] = "tree";
  doc["feature_names"] = feature_names_;
  doc["config"] = config_to_json(config_);
  doc["root"] = node_to_json(nodes_, 0);
  return doc;
}

UpliftTree UpliftTree::from_json(const json& doc) {
  if (doc.at("method").get<std::string>() != "tree")
    throw std::runtime_error("document does not describe a tree model");
  std::vector<TreeNode> nodes;
  node_from_json(doc.at("root"), nodes);
  return UpliftTree(config_from_json(doc.at("config")),
                    doc.at("feature_names").get<std::vector<std::string>>(), std::move(nodes));
}

namespace {

void collect_rules(const UpliftTree& tree, int index,
                   std::vector<std::pair<double, double>>& bounds, double min_t_stat,
                   std::vector<SubgroupRule>& out) {
  const TreeNode& node = tree.nodes()[index];
  if (node.is_leaf) {
    if (node.stats.t_statistic() > min_t_stat) {
      SubgroupRule rule;
      for (int j = 0; j < static_cast<int>(bounds.size()); ++j) {
        const auto [lower, upper] = bounds[j];
        if (std::isinf(lower) && std::isinf(upper)) continue;
        rule.conditions.push_back(SubgroupCondition{j, lower, upper});
      }
      rule.stats = node.stats;
      out.push_back(std::move(rule));
    }
    return;
  }
  const auto saved = bounds[node.feature];
  bounds[node.feature].second = std::min(bounds[node.feature].second, node.threshold);
  collect_rules(tree, node.left, bounds, min_t_stat, out);
  bounds[node.feature] = saved;
  bounds[node.feature].first = std::max(bounds[node.feature].first, node.threshold);
  collect_rules(tree, node.right, bounds, min_t_stat, out);
  bounds[node.feature] = saved;
}

}  // namespace

std::vector<SubgroupRule> extract_rules(const UpliftTree& tree, double min_t_stat) {
  std::vector<SubgroupRule> rules;
  std::vector<std::pair<double, double>> bounds(
      tree.feature_names().size(),
      {-std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()});
  collect_rules(tree, 0, bounds, min_t_stat, rules);
  return rules;
}

}  // namespace uplift
