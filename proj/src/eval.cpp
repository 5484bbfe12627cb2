#include "uplift/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace uplift {

namespace {

EffectEstimate welch_from_span(const Eigen::VectorXd& outcome, const Eigen::VectorXi& treatment,
                               const std::vector<Eigen::Index>& rows) {
  EffectEstimate est;
  double sum_t = 0.0, sum_c = 0.0;
  for (Eigen::Index r : rows) {
    if (treatment[r] == 1) {
      ++est.n_treated;
      sum_t += outcome[r];
    } else {
      ++est.n_control;
      sum_c += outcome[r];
    }
  }
  if (est.n_treated == 0 || est.n_control == 0)
    throw std::runtime_error("undefined effect: a group lacks treated or control rows");
  est.mean_treated = sum_t / static_cast<double>(est.n_treated);
  est.mean_control = sum_c / static_cast<double>(est.n_control);
  est.effect = est.mean_treated - est.mean_control;

  double ss_t = 0.0, ss_c = 0.0;
  for (Eigen::Index r : rows) {
    const double y = outcome[r];
    if (treatment[r] == 1)
      ss_t += (y - est.mean_treated) * (y - est.mean_treated);
    else
      ss_c += (y - est.mean_control) * (y - est.mean_control);
  }
  const double var_t = est.n_treated > 1 ? ss_t / static_cast<double>(est.n_treated - 1) : 0.0;
  const double var_c = est.n_control > 1 ? ss_c / static_cast<double>(est.n_control - 1) : 0.0;
  const double se2 = var_t / static_cast<double>(est.n_treated) +
                     var_c / static_cast<double>(est.n_control);
  est.standard_error = std::sqrt(se2);
  est.t_statistic = est.standard_error > 0.0 ? est.effect / est.standard_error
                                             : std::numeric_limits<double>::quiet_NaN();
  return est;
}

Eigen::Index prefix_size(Eigen::Index n, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must lie in [0, 1]");
  const auto size = static_cast<Eigen::Index>(std::lround(alpha * static_cast<double>(n)));
  return std::max<Eigen::Index>(1, std::min(size, n));
}

}  // namespace

EffectEstimate welch_effect(const Eigen::VectorXd& outcome, const Eigen::VectorXi& treatment) {
  std::vector<Eigen::Index> all(static_cast<size_t>(outcome.size()));
  std::iota(all.begin(), all.end(), Eigen::Index{0});
  return welch_from_span(outcome, treatment, all);
}

std::vector<Eigen::Index> rank_by_tau(const Eigen::VectorXd& preds) {
  if (!preds.allFinite()) throw std::invalid_argument("predictions must be finite");
  std::vector<Eigen::Index> order(static_cast<size_t>(preds.size()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return preds[a] > preds[b]; });
  return order;
}

EffectEstimate top_alpha_effect(const Eigen::VectorXd& outcome, const Eigen::VectorXi& treatment,
                                const Eigen::VectorXd& preds, double alpha) {
  if (outcome.size() != treatment.size() || outcome.size() != preds.size())
    throw std::invalid_argument("outcome/treatment/preds sizes do not match");
  const std::vector<Eigen::Index> order = rank_by_tau(preds);
  const Eigen::Index m = prefix_size(outcome.size(), alpha);
  std::vector<Eigen::Index> prefix(order.begin(), order.begin() + m);
  try {
    return welch_from_span(outcome, treatment, prefix);
  } catch (const std::runtime_error&) {
    throw std::runtime_error("undefined effect at this alpha (prefix lacks an arm)");
  }
}

std::vector<double> default_qini_grid() {
  std::vector<double> grid;
  for (int k = 0; k <= 20; ++k) grid.push_back(static_cast<double>(k) / 20.0);
  return grid;
}

QiniCurve qini_curve(const Eigen::VectorXd& outcome, const Eigen::VectorXi& treatment,
                     const Eigen::VectorXd& preds, const std::vector<double>& grid) {
  if (outcome.size() != treatment.size() || outcome.size() != preds.size())
    throw std::invalid_argument("outcome/treatment/preds sizes do not match");
  std::vector<double> alphas = grid;
  std::sort(alphas.begin(), alphas.end());
  if (alphas.empty() || alphas.front() != 0.0 || alphas.back() != 1.0)
    throw std::invalid_argument("qini grid must cover 0 and 1");
  for (double a : alphas)
    if (!(a >= 0.0 && a <= 1.0)) throw std::invalid_argument("qini grid values must lie in [0, 1]");

  const std::vector<Eigen::Index> order = rank_by_tau(preds);

  QiniCurve curve;
  // tau_rnd is the full-prefix value so that qini(1) is exactly zero.
  std::vector<Eigen::Index> all(order.begin(), order.end());
  curve.tau_rnd = welch_from_span(outcome, treatment, all).effect;

  int defined_count = 0;
  for (double alpha : alphas) {
    QiniPoint point;
    point.alpha = alpha;
    if (alpha == 0.0) {
      point.tau_at_alpha = std::numeric_limits<double>::quiet_NaN();
      point.qini = 0.0;
      point.defined = true;
    } else {
      const Eigen::Index m = prefix_size(outcome.size(), alpha);
      std::vector<Eigen::Index> prefix(order.begin(), order.begin() + m);
      try {
        point.tau_at_alpha = welch_from_span(outcome, treatment, prefix).effect;
        point.qini = alpha * (point.tau_at_alpha - curve.tau_rnd);
        point.defined = true;
      } catch (const std::runtime_error&) {
        point.tau_at_alpha = std::numeric_limits<double>::quiet_NaN();
        point.qini = std::numeric_limits<double>::quiet_NaN();
        point.defined = false;
      }
    }
    if (point.defined) ++defined_count;
    curve.points.push_back(point);
  }
  if (defined_count < 2) throw std::runtime_error("qini curve has fewer than 2 defined points");
  return curve;
}

QiniCurve qini_curve(const Eigen::VectorXd& outcome, const Eigen::VectorXi& treatment,
                     const Eigen::VectorXd& preds) {
  return qini_curve(outcome, treatment, preds, default_qini_grid());
}

double qini_index(const QiniCurve& curve) {
  std::vector<const QiniPoint*> defined;
  for (const auto& p : curve.points)
    if (p.defined) defined.push_back(&p);
  if (defined.size() < 2) throw std::runtime_error("qini curve has fewer than 2 defined points");
  double area = 0.0;
  for (size_t i = 1; i < defined.size(); ++i) {
    const double da = defined[i]->alpha - defined[i - 1]->alpha;
    area += da * 0.5 * (defined[i]->qini + defined[i - 1]->qini);
  }
  return area;
}

ValidationFit validation_regression(const Eigen::VectorXd& outcome,
                                    const Eigen::VectorXi& treatment,
                                    const Eigen::VectorXd& preds) {
  if (outcome.size() != treatment.size() || outcome.size() != preds.size())
    throw std::invalid_argument("outcome/treatment/preds sizes do not match");
  const Eigen::Index n = outcome.size();
  if ((preds.array() == preds[0]).all()) throw std::runtime_error("collinear design");

  Eigen::MatrixXd design(n, 3);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double t = treatment[i];
    design(i, 0) = t;
    design(i, 1) = preds[i];
    design(i, 2) = t * preds[i];
  }
  ValidationFit out{fit_ols(design, outcome, Eigen::VectorXd::Ones(n))};
  return out;
}

}  // namespace uplift
