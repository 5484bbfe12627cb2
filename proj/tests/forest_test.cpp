#include "uplift/forest.hpp"

#include <cmath>
#include <map>
#include <set>

#include "doctest.h"
#include "helpers.hpp"
#include "uplift/synth.hpp"

using namespace uplift;

namespace {

UpliftTree constant_tree(double tau, const std::vector<std::string>& names) {
  std::vector<TreeNode> nodes(1);
  nodes[0].stats.tau_hat = tau;
  nodes[0].stats.n_treated = nodes[0].stats.n_control = 1;
  return UpliftTree(TreeConfig{}, names, nodes);
}

}  // namespace

TEST_CASE("degenerate ensemble equals a single tree") {
  const Dataset ds = testing::random_dataset(200, 2, 301);
  ForestConfig config;
  config.n_trees = 1;
  config.row_fraction = 1.0;
  config.feature_fraction = 1.0;
  config.with_replacement = false;
  config.tree.min_leaf_per_arm = 8;
  config.tree.max_depth = 3;

  const UpliftForest forest = build_forest(ds, config);
  const UpliftTree tree = build_tree(ds, config.tree);
  const Eigen::MatrixXd probe = testing::random_dataset(33, 2, 302).features();
  CHECK(forest.predict_tau(probe) == tree.predict_tau(probe));
  CHECK(forest.trees().size() == 1);
  CHECK(forest.skipped_trees() == 0);
}

TEST_CASE("forests are deterministic in the seed") {
  const Dataset ds = testing::random_dataset(300, 3, 303);
  ForestConfig config;
  config.n_trees = 12;
  config.feature_fraction = 2.0 / 3.0;
  config.seed = 9001;
  config.tree.min_leaf_per_arm = 5;
  config.tree.max_depth = 3;

  const UpliftForest a = build_forest(ds, config);
  const UpliftForest b = build_forest(ds, config);
  const Eigen::MatrixXd probe = testing::random_dataset(25, 3, 304).features();
  CHECK(a.predict_tau(probe) == b.predict_tau(probe));
  CHECK(a.to_json() == b.to_json());

  config.seed = 9002;
  const UpliftForest c = build_forest(ds, config);
  CHECK(a.predict_tau(probe) != c.predict_tau(probe));
}

TEST_CASE("forest recovers the binary-law subgroup effect") {
  const GeneratedSample sample = gen_law7(6000, 305);
  ForestConfig config;
  config.n_trees = 100;
  config.seed = 7;
  config.tree.criterion = SplitCriterion::divergence_euclid;
  config.tree.outcome_threshold = 0.5;
  config.tree.min_leaf_per_arm = 50;
  config.tree.max_depth = 5;

  const UpliftForest forest = build_forest(sample.dataset, config);
  const Eigen::VectorXd tau = forest.predict_tau(sample.dataset.features());
  double sum = 0.0;
  Eigen::Index count = 0;
  for (Eigen::Index i = 0; i < sample.dataset.n(); ++i) {
    if (sample.dataset.features()(i, 2) == 1.0) {
      sum += tau[i];
      ++count;
    }
  }
  CHECK(std::abs(sum / static_cast<double>(count) - 0.26) < 0.05);
}

TEST_CASE("prediction is the mean over member trees") {
  const std::vector<std::string> names{"a"};
  std::vector<UpliftTree> trees;
  trees.push_back(constant_tree(1.0, names));
  trees.push_back(constant_tree(4.0, names));
  const UpliftForest forest(ForestConfig{}, names, trees, 0);
  const Eigen::MatrixXd probe = Eigen::MatrixXd::Zero(3, 1);
  CHECK((forest.predict_tau(probe).array() == 2.5).all());

  std::vector<UpliftTree> reversed{trees[1], trees[0]};
  const UpliftForest mirrored(ForestConfig{}, names, reversed, 0);
  CHECK((forest.predict_tau(probe) - mirrored.predict_tau(probe)).cwiseAbs().maxCoeff() <
        1e-12);

  const UpliftForest uniform(ForestConfig{}, names,
                             {constant_tree(0.75, names), constant_tree(0.75, names)}, 0);
  CHECK((uniform.predict_tau(probe).array() == 0.75).all());
  CHECK(uniform.predict_tau(Eigen::MatrixXd::Zero(7, 1)).size() == 7);
}

TEST_CASE("across-seed variance of the mean prediction shrinks with more trees") {
  const GeneratedSample sample = gen_law7(1500, 306);
  const Eigen::MatrixXd probe = gen_law7(400, 307).dataset.features();

  ForestConfig config;
  config.tree.criterion = SplitCriterion::divergence_euclid;
  config.tree.outcome_threshold = 0.5;
  config.tree.min_leaf_per_arm = 25;
  config.tree.max_depth = 4;

  std::map<int, double> variance;
  for (int n_trees : {1, 10, 100}) {
    config.n_trees = n_trees;
    std::vector<double> means;
    for (int s = 0; s < 12; ++s) {
      config.seed = 1000 + s;
      means.push_back(build_forest(sample.dataset, config).predict_tau(probe).mean());
    }
    double avg = 0.0;
    for (double m : means) avg += m;
    avg /= means.size();
    double var = 0.0;
    for (double m : means) var += (m - avg) * (m - avg);
    variance[n_trees] = var / (means.size() - 1);
  }
  CHECK(variance[10] <= variance[1]);
  CHECK(variance[100] <= variance[10]);
}

TEST_CASE("impossible subsamples are skipped and eventually fail") {
  const Dataset ds = testing::random_dataset(40, 2, 308);
  ForestConfig config;
  config.n_trees = 3;
  config.tree.min_leaf_per_arm = 30;  // 2*30 per arm can never hold in 40 rows
  CHECK_THROWS_WITH_AS(build_forest(ds, config), doctest::Contains("all trees skipped"),
                       std::runtime_error);
}

TEST_CASE("forests serialize and round trip") {
  const Dataset ds = testing::random_dataset(150, 3, 309);
  ForestConfig config;
  config.n_trees = 5;
  config.feature_fraction = 2.0 / 3.0;
  config.tree.min_leaf_per_arm = 5;
  config.tree.max_depth = 3;
  const UpliftForest forest = build_forest(ds, config);
  const UpliftForest loaded = UpliftForest::from_json(forest.to_json());
  const Eigen::MatrixXd probe = testing::random_dataset(20, 3, 310).features();
  CHECK(loaded.predict_tau(probe) == forest.predict_tau(probe));
  CHECK(loaded.trees().size() == forest.trees().size());
}

TEST_CASE("per-tree feature subsets are remapped to the full space") {
  const Dataset ds = testing::random_dataset(200, 3, 311);
  ForestConfig config;
  config.n_trees = 8;
  config.feature_fraction = 1.0 / 3.0;
  config.tree.min_leaf_per_arm = 5;
  config.tree.max_depth = 2;
  const UpliftForest forest = build_forest(ds, config);
  // Every member tree accepts the full 3-column matrix.
  const Eigen::VectorXd tau = forest.predict_tau(ds.features());
  CHECK(tau.size() == ds.n());
  CHECK(tau.allFinite());
  std::set<int> used;
  for (const auto& tree : forest.trees())
    for (const auto& node : tree.nodes())
      if (!node.is_leaf) used.insert(node.feature);
  for (int f : used) CHECK(f < 3);
}
