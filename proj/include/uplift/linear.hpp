#pragma once

#include <Eigen/Dense>

namespace uplift {

/// Weighted least-squares fit. Coefficient 0 is the intercept; the optional
/// ridge penalty applies to the slopes only. Standard errors follow the
/// classical formula with the weight matrix and are unavailable (NaN, flag
/// false) when n <= K + 1.
struct LinearModel {
  Eigen::VectorXd coefficients;
  Eigen::VectorXd standard_errors;
  Eigen::VectorXd t_statistics;
  double residual_variance = 0.0;
  Eigen::Index n_fit = 0;
  bool has_standard_errors = false;

  double intercept() const { return coefficients[0]; }
  Eigen::VectorXd slopes() const { return coefficients.tail(coefficients.size() - 1); }

  double predict_row(const Eigen::RowVectorXd& x) const;
  Eigen::VectorXd predict(const Eigen::MatrixXd& features) const;
};

LinearModel fit_ols(const Eigen::MatrixXd& features, const Eigen::VectorXd& target,
                    const Eigen::VectorXd& weights, double ridge = 0.0);

}  // namespace uplift
