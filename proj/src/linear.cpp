#include "uplift/linear.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace uplift {

double LinearModel::predict_row(const Eigen::RowVectorXd& x) const {
  if (x.size() + 1 != coefficients.size())
    throw std::invalid_argument("feature count does not match fitted model");
  return coefficients[0] + x.dot(coefficients.tail(coefficients.size() - 1));
}

Eigen::VectorXd LinearModel::predict(const Eigen::MatrixXd& features) const {
  if (features.cols() + 1 != coefficients.size())
    throw std::invalid_argument("feature count does not match fitted model");
  return Eigen::VectorXd::Constant(features.rows(), coefficients[0]) +
         features * coefficients.tail(coefficients.size() - 1);
}

LinearModel fit_ols(const Eigen::MatrixXd& features, const Eigen::VectorXd& target,
                    const Eigen::VectorXd& weights, double ridge) {
  const Eigen::Index n = target.size();
  const Eigen::Index k = features.cols();
  const Eigen::Index p = k + 1;
  if (n == 0) throw std::invalid_argument("no rows to fit");
  if (features.rows() != n || weights.size() != n)
    throw std::invalid_argument("features/target/weights sizes do not match");
  if ((weights.array() <= 0.0).any()) throw std::invalid_argument("weights must be positive");
  if (ridge < 0.0) throw std::invalid_argument("ridge must be non-negative");

  // Design [1 X] with rows scaled by sqrt(w); ridge enters as sqrt(ridge)
  // pseudo-rows on the slope coordinates.
  const Eigen::Index extra = ridge > 0.0 ? k : 0;
  Eigen::MatrixXd design = Eigen::MatrixXd::Zero(n + extra, p);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + extra);
  const Eigen::ArrayXd root_w = weights.array().sqrt();
  design.col(0).head(n) = root_w.matrix();
  for (Eigen::Index j = 0; j < k; ++j)
    design.col(j + 1).head(n) = features.col(j).array() * root_w;
  rhs.head(n) = target.array() * root_w;
  if (extra > 0) {
    const double root_ridge = std::sqrt(ridge);
    for (Eigen::Index j = 0; j < k; ++j) design(n + j, j + 1) = root_ridge;
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < p) throw std::runtime_error("singular design");

  LinearModel model;
  model.coefficients = qr.solve(rhs);
  model.n_fit = n;

  const Eigen::VectorXd fitted =
      Eigen::VectorXd::Constant(n, model.coefficients[0]) +
      features * model.coefficients.tail(k);
  const Eigen::ArrayXd residuals = target.array() - fitted.array();
  const double weighted_rss = (weights.array() * residuals.square()).sum();

  const double nan = std::numeric_limits<double>::quiet_NaN();
  model.standard_errors = Eigen::VectorXd::Constant(p, nan);
  model.t_statistics = Eigen::VectorXd::Constant(p, nan);
  const Eigen::Index dof = n - p;
  if (dof >= 1) {
    model.residual_variance = weighted_rss / static_cast<double>(dof);
    model.has_standard_errors = true;
    const Eigen::MatrixXd normal = design.transpose() * design;
    const Eigen::MatrixXd cov = model.residual_variance *
                                normal.ldlt().solve(Eigen::MatrixXd::Identity(p, p));
    for (Eigen::Index j = 0; j < p; ++j) {
      const double var = cov(j, j);
      if (var >= 0.0) model.standard_errors[j] = std::sqrt(var);
      if (model.standard_errors[j] > 0.0)
        model.t_statistics[j] = model.coefficients[j] / model.standard_errors[j];
    }
  } else {
    model.residual_variance = nan;
  }
  return model;
}

}  // namespace uplift
