#include "uplift/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "uplift/rng.hpp"

namespace uplift {

using nlohmann::json;

namespace {

Eigen::Index fraction_count(Eigen::Index total, double fraction, const char* what) {
  if (!(fraction > 0.0 && fraction <= 1.0))
    throw std::invalid_argument(std::string(what) + " must lie in (0, 1]");
  const auto count =
      static_cast<Eigen::Index>(std::lround(fraction * static_cast<double>(total)));
  return std::max<Eigen::Index>(1, std::min(count, total));
}

std::vector<Eigen::Index> sample_rows(Eigen::Index n, Eigen::Index count, bool with_replacement,
                                      Rng& rng) {
  std::vector<Eigen::Index> rows;
  rows.reserve(static_cast<size_t>(count));
  if (with_replacement) {
    for (Eigen::Index i = 0; i < count; ++i)
      rows.push_back(static_cast<Eigen::Index>(draw_below(rng, static_cast<std::uint64_t>(n))));
  } else {
    std::vector<Eigen::Index> perm(static_cast<size_t>(n));
    std::iota(perm.begin(), perm.end(), Eigen::Index{0});
    for (Eigen::Index i = n - 1; i > 0; --i) {
      const auto j = static_cast<Eigen::Index>(draw_below(rng, static_cast<std::uint64_t>(i) + 1));
      std::swap(perm[i], perm[j]);
    }
    rows.assign(perm.begin(), perm.begin() + count);
  }
  std::sort(rows.begin(), rows.end());
  return rows;
}

std::vector<Eigen::Index> sample_features(Eigen::Index k, Eigen::Index count, Rng& rng) {
  std::vector<Eigen::Index> all(static_cast<size_t>(k));
  std::iota(all.begin(), all.end(), Eigen::Index{0});
  for (Eigen::Index i = k - 1; i > 0; --i) {
    const auto j = static_cast<Eigen::Index>(draw_below(rng, static_cast<std::uint64_t>(i) + 1));
    std::swap(all[i], all[j]);
  }
  all.resize(static_cast<size_t>(count));
  std::sort(all.begin(), all.end());
  return all;
}

// Rebuilds the tree's nodes against the full feature space.
UpliftTree remap_tree(const UpliftTree& tree, const std::vector<Eigen::Index>& feature_map,
                      const std::vector<std::string>& full_names) {
  std::vector<TreeNode> nodes = tree.nodes();
  for (auto& node : nodes)
    if (!node.is_leaf) node.feature = static_cast<int>(feature_map[node.feature]);
  return UpliftTree(tree.config(), full_names, std::move(nodes));
}

}  // namespace

UpliftForest build_forest(const Dataset& ds, const ForestConfig& config) {
  if (config.n_trees < 1) throw std::invalid_argument("n_trees must be >= 1");
  const Eigen::Index n_rows = fraction_count(ds.n(), config.row_fraction, "row_fraction");
  const Eigen::Index n_features =
      fraction_count(ds.num_features(), config.feature_fraction, "feature_fraction");

  std::vector<UpliftTree> trees;
  Eigen::Index skipped = 0;
  for (Eigen::Index t = 0; t < config.n_trees; ++t) {
    bool built = false;
    for (int attempt = 0; attempt < 10 && !built; ++attempt) {
      const std::uint64_t sub_seed =
          mix_seed(config.seed, static_cast<std::uint64_t>(t) * 16 + attempt);
      Rng rng(sub_seed);
      const std::vector<Eigen::Index> rows =
          sample_rows(ds.n(), n_rows, config.with_replacement, rng);
      const std::vector<Eigen::Index> features =
          sample_features(ds.num_features(), n_features, rng);

      Dataset sub = ds.subset(rows);
      Eigen::MatrixXd sub_features(sub.n(), n_features);
      std::vector<std::string> sub_names;
      for (Eigen::Index j = 0; j < n_features; ++j) {
        sub_features.col(j) = sub.features().col(features[j]);
        sub_names.push_back(sub.feature_names()[features[j]]);
      }
      Dataset projected(std::move(sub_features), std::move(sub_names), sub.outcome(),
                        sub.treatment(), sub.weights());

      TreeConfig tree_config = config.tree;
      tree_config.seed = mix_seed(sub_seed, 1);
      try {
        UpliftTree tree = build_tree(projected, tree_config);
        trees.push_back(remap_tree(tree, features, ds.feature_names()));
        built = true;
      } catch (const std::runtime_error&) {
        // subsample lost an arm; retry with a fresh subseed
      }
    }
    if (!built) ++skipped;
  }
  if (trees.empty()) throw std::runtime_error("all trees skipped: subsamples never satisfied the leaf minimum");
  return UpliftForest(config, ds.feature_names(), std::move(trees), skipped);
}

UpliftForest::UpliftForest(ForestConfig config, std::vector<std::string> feature_names,
                           std::vector<UpliftTree> trees, Eigen::Index skipped_trees)
    : config_(config),
      feature_names_(std::move(feature_names)),
      trees_(std::move(trees)),
      skipped_trees_(skipped_trees) {
  if (trees_.empty()) throw std::invalid_argument("forest needs at least one tree");
}

Eigen::VectorXd UpliftForest::predict_tau(const Eigen::MatrixXd& features) const {
  if (features.cols() != static_cast<Eigen::Index>(feature_names_.size()))
    throw std::invalid_argument("feature count does not match forest");
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(features.rows());
  for (const auto& tree : trees_) sum += tree.predict_tau(features);
  return sum / static_cast<double>(trees_.size());
}

json UpliftForest::to_json() const {
  json doc;
  doc["method"] = "forest";
  doc["feature_names"] = feature_names_;
  doc["config"] = json{{"n_trees", config_.n_trees},
                       {"row_fraction", config_.row_fraction},
                       {"feature_fraction", config_.feature_fraction},
                       {"with_replacement", config_.with_replacement},
                       {"seed", config_.seed}};
  doc["skipped_trees"] = skipped_trees_;
  json members = json::array();
  for (const auto& tree : trees_) members.push_back(tree.to_json());
  doc["trees"] = std::move(members);
  return doc;
}

UpliftForest UpliftForest::from_json(const json& doc) {
  if (doc.at("method").get<std::string>() != "forest")
    throw std::runtime_error("document does not describe a forest model");
  ForestConfig config;
  const json& c = doc.at("config");
  config.n_trees = c.at("n_trees").get<Eigen::Index>();
  config.row_fraction = c.at("row_fraction").get<double>();
  config.feature_fraction = c.at("feature_fraction").get<double>();
  config.with_replacement = c.at("with_replacement").get<bool>();
  config.seed = c.at("seed").get<std::uint64_t>();
  std::vector<UpliftTree> trees;
  for (const auto& member : doc.at("trees")) trees.push_back(UpliftTree::from_json(member));
  if (!trees.empty()) config.tree = trees.front().config();
  return UpliftForest(config, doc.at("feature_names").get<std::vector<std::string>>(),
                      std::move(trees), doc.at("skipped_trees").get<Eigen::Index>());
}

}  // namespace uplift
