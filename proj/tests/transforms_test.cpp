#include "uplift/transforms.hpp"

#include "doctest.h"
#include "helpers.hpp"
#include "uplift/synth.hpp"

using namespace uplift;

TEST_CASE("signed outcome reproduces the worked table") {
  const TransformedDataset z = signed_outcome(testing::table1());
  Eigen::VectorXd expected(6);
  expected << -1.12, -0.48, 0.35, -0.99, 1.01, 0.34;
  CHECK(z.outcome == expected);
  CHECK(z.features == testing::table1().features());
  CHECK(z.feature_names == std::vector<std::string>{"x1", "x2"});
  CHECK(z.transform == "signed_outcome");
}

TEST_CASE("signed outcome of a zero outcome is zero") {
  Eigen::MatrixXd x(2, 1);
  x << 1, 2;
  Eigen::VectorXd y = Eigen::VectorXd::Zero(2);
  Eigen::VectorXi t(2);
  t << 0, 1;
  const TransformedDataset z = signed_outcome(Dataset(x, {"a"}, y, t));
  CHECK(z.outcome[0] == 0.0);
  CHECK(z.outcome[1] == 0.0);
}

TEST_CASE("flipping arms negates the signed outcome") {
  for (int rep = 0; rep < 10; ++rep) {
    const Dataset ds = testing::random_dataset(20, 2, 500 + rep);
    Eigen::VectorXi flipped = Eigen::VectorXi::Ones(ds.n()) - ds.treatment();
    const Dataset mirrored(ds.features(), ds.feature_names(), ds.outcome(), flipped);
    CHECK(signed_outcome(ds).outcome == -signed_outcome(mirrored).outcome);
  }
}

TEST_CASE("class transform truth table") {
  Eigen::MatrixXd x(4, 1);
  x << 1, 2, 3, 4;
  Eigen::VectorXd y(4);
  y << 1, 0, 1, 0;
  Eigen::VectorXi t(4);
  t << 1, 0, 0, 1;
  const TransformedDataset z = class_transform(Dataset(x, {"a"}, y, t));
  CHECK(z.outcome[0] == 1.0);  // y=1, t=1
  CHECK(z.outcome[1] == 1.0);  // y=0, t=0
  CHECK(z.outcome[2] == 0.0);  // y=1, t=0
  CHECK(z.outcome[3] == 0.0);  // y=0, t=1
}

TEST_CASE("class transform output stays in {0,1}") {
  for (int rep = 0; rep < 10; ++rep) {
    const Dataset ds = testing::random_dataset(40, 2, 900 + rep, /*binary_outcome=*/true);
    const TransformedDataset z = class_transform(ds);
    CHECK(((z.outcome.array() == 0.0) || (z.outcome.array() == 1.0)).all());
  }
}

TEST_CASE("class transform rejects numeric outcomes") {
  CHECK_THROWS_AS(class_transform(testing::table1()), std::invalid_argument);
}

TEST_CASE("covariate transform reproduces the worked table") {
  const TransformedDataset star = covariate_transform(testing::table1());
  Eigen::MatrixXd expected(6, 2);
  expected << -0.9, -1.56,  //
      1.02, -1.07,          //
      0.66, -0.14,          //
      0.64, -0.1,           //
      -0.49, 0.41,          //
      -1.42, -0.38;
  CHECK(star.features == expected);
  CHECK(star.outcome == testing::table1().outcome());
}

TEST_CASE("covariate transform fixes treated rows and is an involution") {
  const Dataset ds = testing::random_dataset(30, 3, 77);
  const TransformedDataset once = covariate_transform(ds);
  for (Eigen::Index i = 0; i < ds.n(); ++i)
    if (ds.treatment()[i] == 1) CHECK(once.features.row(i) == ds.features().row(i));
  const Dataset reassembled(once.features, once.feature_names, once.outcome, ds.treatment());
  CHECK(covariate_transform(reassembled).features == ds.features());
}

TEST_CASE("interaction augmentation reproduces the worked table") {
  const TransformedDataset aug = interaction_augment(testing::table1());
  CHECK(aug.feature_names ==
        std::vector<std::string>{"x1", "x2", "t", "t*x1", "t*x2"});
  Eigen::MatrixXd expected(6, 5);
  expected << -0.9, -1.56, 1, -0.9, -1.56,  //
      1.02, -1.07, 1, 1.02, -1.07,          //
      0.66, -0.14, 1, 0.66, -0.14,          //
      -0.64, 0.1, 0, 0, 0,                  //
      0.49, -0.41, 0, 0, 0,                 //
      1.42, 0.38, 0, 0, 0;
  CHECK(aug.features == expected);
  CHECK(aug.outcome == testing::table1().outcome());
}

TEST_CASE("interaction columns vanish for an all-zero control row") {
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(2, 2);
  Eigen::VectorXd y(2);
  y << 1, 2;
  Eigen::VectorXi t(2);
  t << 0, 1;
  const TransformedDataset aug = interaction_augment(Dataset(x, {"a", "b"}, y, t));
  CHECK(aug.features.row(0).tail(3).isZero());
}

TEST_CASE("signed outcome mean tracks the average effect on a balanced law") {
  // E[2Z] equals E[tau] = E[X1] = 0 under the first synthetic law.
  const GeneratedSample sample = gen_law3(100000, 21);
  const TransformedDataset z = signed_outcome(sample.dataset);
  CHECK(std::abs(2.0 * z.outcome.mean()) < 0.02);
}
