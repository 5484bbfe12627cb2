#pragma once

#include <Eigen/Dense>

#include <vector>

#include "uplift/linear.hpp"

namespace uplift {

/// Arm-mean difference with Welch (unequal-variance) standard error.
struct EffectEstimate {
  double effect = 0.0;
  double standard_error = 0.0;
  double t_statistic = 0.0;
  Eigen::Index n_treated = 0;
  Eigen::Index n_control = 0;
  double mean_treated = 0.0;
  double mean_control = 0.0;
};

EffectEstimate welch_effect(const Eigen::VectorXd& outcome, const Eigen::VectorXi& treatment);

/// Row order by descending prediction; ties by ascending original index.
std::vector<Eigen::Index> rank_by_tau(const Eigen::VectorXd& preds);

/// Welch effect on the top round(alpha * n) rows (minimum 1) of the ranking.
/// Throws when the prefix lacks an arm.
EffectEstimate top_alpha_effect(const Eigen::VectorXd& outcome, const Eigen::VectorXi& treatment,
                                const Eigen::VectorXd& preds, double alpha);

struct QiniPoint {
  double alpha = 0.0;
  double tau_at_alpha = 0.0;
  double qini = 0.0;
  bool defined = false;
};

struct QiniCurve {
  std::vector<QiniPoint> points;
  double tau_rnd = 0.0;  // full-sample effect
};

/// Grid alpha = k/20, k = 0..20.
std::vector<double> default_qini_grid();

/// qini(alpha) = alpha * (tau(alpha) - tau_rnd). Grid must cover 0 and 1;
/// points whose prefix lacks an arm are kept but marked undefined.
QiniCurve qini_curve(const Eigen::VectorXd& outcome, const Eigen::VectorXi& treatment,
                     const Eigen::VectorXd& preds, const std::vector<double>& grid);
QiniCurve qini_curve(const Eigen::VectorXd& outcome, const Eigen::VectorXi& treatment,
                     const Eigen::VectorXd& preds);

/// Trapezoidal area over the defined grid points.
double qini_index(const QiniCurve& curve);

/// OLS fit of y on (1, t, pred, t*pred); coefficients alpha_0..alpha_3.
struct ValidationFit {
  LinearModel fit;
  double coefficient(int i) const { return fit.coefficients[i]; }
  double standard_error(int i) const { return fit.standard_errors[i]; }
  double t_statistic(int i) const { return fit.t_statistics[i]; }
};

ValidationFit validation_regression(const Eigen::VectorXd& outcome,
                                    const Eigen::VectorXi& treatment,
                                    const Eigen::VectorXd& preds);

}  // namespace uplift
