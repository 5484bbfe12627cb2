#pragma once

#include <cstdint>

#include "uplift/dataset.hpp"

namespace uplift {

/// One synthetic draw plus the quantities a real experiment never reveals:
/// the exact per-row effect from the law's closed form, and the latent
/// variables (noise, and the latent response for law 7) used to build the
/// outcome. Latents are kept for inspection but never exported to training
/// CSVs.
struct GeneratedSample {
  Dataset dataset;
  Eigen::VectorXd true_tau;
  Eigen::MatrixXd latents;
  std::vector<std::string> latent_names;
  int law = 0;
};

/// Gaussian CDF, absolute error well below 1e-7.
double normal_cdf(double x);

double law3_response(int t, double x1, double x2, double eps);
double law4_response(int t, double x1, double x2, double eps);
/// Latent Y* of law 7; the observed outcome is 1 when Y* >= 0.
double law7_latent(int t, double x1, double x3, double eps);
double law7_true_tau(double x1, double x3);

GeneratedSample gen_law3(Eigen::Index n, std::uint64_t seed);
GeneratedSample gen_law4(Eigen::Index n, std::uint64_t seed);
GeneratedSample gen_law7(Eigen::Index n, std::uint64_t seed);

/// Dispatch on law id in {3, 4, 7}.
GeneratedSample generate(int law, Eigen::Index n, std::uint64_t seed);

}  // namespace uplift
