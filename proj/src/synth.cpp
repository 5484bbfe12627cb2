#include "uplift/synth.hpp"

#include <cmath>
#include <stdexcept>

#include "uplift/rng.hpp"

namespace uplift {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double law3_response(int t, double x1, double x2, double eps) { return t * x1 + x2 + eps; }

double law4_response(int t, double x1, double x2, double eps) {
  return 0.5 * x1 + x2 + 0.5 * (2.0 * t - 1.0) * 0.5 * x1 + eps;
}

double law7_latent(int t, double x1, double x3, double eps) { return x1 + x3 * t + eps; }

double law7_true_tau(double x1, double x3) { return normal_cdf(x1 + x3) - normal_cdf(x1); }

namespace {

GeneratedSample make_sample(int law, Eigen::MatrixXd features, std::vector<std::string> names,
                            Eigen::VectorXd outcome, Eigen::VectorXi treatment,
                            Eigen::VectorXd true_tau, Eigen::MatrixXd latents,
                            std::vector<std::string> latent_names) {
  GeneratedSample s{Dataset(std::move(features), std::move(names), std::move(outcome),
                            std::move(treatment), Eigen::VectorXd()),
                    std::move(true_tau), std::move(latents), std::move(latent_names), law};
  return s;
}

}  // namespace

GeneratedSample gen_law3(Eigen::Index n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::bernoulli_distribution arm(0.5);

  Eigen::MatrixXd x(n, 2), latents(n, 1);
  Eigen::VectorXd y(n), tau(n);
  Eigen::VectorXi t(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    x(i, 0) = normal(rng);
    x(i, 1) = normal(rng);
    t[i] = arm(rng) ? 1 : 0;
    const double eps = normal(rng);
    latents(i, 0) = eps;
    y[i] = law3_response(t[i], x(i, 0), x(i, 1), eps);
    tau[i] = x(i, 0);
  }
  return make_sample(3, std::move(x), {"x1", "x2"}, std::move(y), std::move(t), std::move(tau),
                     std::move(latents), {"eps"});
}

GeneratedSample gen_law4(Eigen::Index n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  // N(0, 0.1) read as variance 0.1, consistent with the N(0, 1) notation.
  std::normal_distribution<double> noise(0.0, std::sqrt(0.1));
  std::bernoulli_distribution arm(0.5);

  Eigen::MatrixXd x(n, 2), latents(n, 1);
  Eigen::VectorXd y(n), tau(n);
  Eigen::VectorXi t(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    x(i, 0) = normal(rng);
    x(i, 1) = normal(rng);
    t[i] = arm(rng) ? 1 : 0;
    const double eps = noise(rng);
    latents(i, 0) = eps;
    y[i] = law4_response(t[i], x(i, 0), x(i, 1), eps);
    tau[i] = 0.5 * x(i, 0);
  }
  return make_sample(4, std::move(x), {"x1", "x2"}, std::move(y), std::move(t), std::move(tau),
                     std::move(latents), {"eps"});
}

GeneratedSample gen_law7(Eigen::Index n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::bernoulli_distribution binary_feature(0.6);
  std::bernoulli_distribution arm(0.5);

  Eigen::MatrixXd x(n, 3), latents(n, 2);
  Eigen::VectorXd y(n), tau(n);
  Eigen::VectorXi t(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    x(i, 0) = normal(rng);
    x(i, 1) = normal(rng);
    x(i, 2) = binary_feature(rng) ? 1.0 : 0.0;
    t[i] = arm(rng) ? 1 : 0;
    const double eps = normal(rng);
    const double ystar = law7_latent(t[i], x(i, 0), x(i, 2), eps);
    latents(i, 0) = eps;
    latents(i, 1) = ystar;
    y[i] = ystar >= 0.0 ? 1.0 : 0.0;
    tau[i] = law7_true_tau(x(i, 0), x(i, 2));
  }
  return make_sample(7, std::move(x), {"x1", "x2", "x3"}, std::move(y), std::move(t),
                     std::move(tau), std::move(latents), {"eps", "ystar"});
}

GeneratedSample generate(int law, Eigen::Index n, std::uint64_t seed) {
  switch (law) {
    case 3: return gen_law3(n, seed);
    case 4: return gen_law4(n, seed);
    case 7: return gen_law7(n, seed);
    default: throw std::invalid_argument("unknown law id " + std::to_string(law) + " (use 3, 4 or 7)");
  }
}

}  // namespace uplift
