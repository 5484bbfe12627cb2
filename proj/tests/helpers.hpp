#pragma once

#include <Eigen/Dense>

#include <random>
#include <string>
#include <vector>

#include "uplift/dataset.hpp"

namespace uplift::testing {

// Six observations of the worked numeric example: y = t*x1 + x2 + eps with
// treatment (1,1,1,0,0,0).
inline Dataset table1() {
  Eigen::MatrixXd x(6, 2);
  x << -0.9, -1.56,  //
      1.02, -1.07,   //
      0.66, -0.14,   //
      -0.64, 0.1,    //
      0.49, -0.41,   //
      1.42, 0.38;
  Eigen::VectorXd y(6);
  y << -1.12, -0.48, 0.35, 0.99, -1.01, -0.34;
  Eigen::VectorXi t(6);
  t << 1, 1, 1, 0, 0, 0;
  return Dataset(x, {"x1", "x2"}, y, t);
}

inline Eigen::VectorXd table1_eps() {
  Eigen::VectorXd eps(6);
  eps << 1.34, -0.43, -0.17, 0.89, -0.6, -0.72;
  return eps;
}

// The same rows with a fitted-effect column, as used for ranking examples:
// predictions indexed by original row g1..g6.
inline Eigen::VectorXd table2_predictions() {
  Eigen::VectorXd preds(6);
  preds << -0.9, 1.02, 0.66, -0.64, 0.49, 1.42;
  return preds;
}

inline Dataset random_dataset(Eigen::Index n, Eigen::Index k, std::uint64_t seed,
                              bool binary_outcome = false) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::bernoulli_distribution arm(0.5);
  Eigen::MatrixXd x(n, k);
  Eigen::VectorXd y(n);
  Eigen::VectorXi t(n);
  std::vector<std::string> names;
  for (Eigen::Index j = 0; j < k; ++j) names.push_back("x" + std::to_string(j + 1));
  // Keep both arms non-empty by construction.
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < k; ++j) x(i, j) = normal(rng);
    t[i] = i < 2 ? static_cast<int>(i) : (arm(rng) ? 1 : 0);
    const double raw = normal(rng);
    y[i] = binary_outcome ? (raw >= 0.0 ? 1.0 : 0.0) : raw;
  }
  return Dataset(x, names, y, t);
}

}  // namespace uplift::testing
