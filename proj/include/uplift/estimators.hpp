#pragma once

#include <Eigen/Dense>

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"
#include "uplift/dataset.hpp"
#include "uplift/linear.hpp"

namespace uplift {

/// Common contract for fitted effect estimators. Fitting happens in the
/// factory functions; a constructed estimator is immutable and safe for
/// concurrent predict_tau calls.
class UpliftEstimator {
 public:
  virtual ~UpliftEstimator() = default;

  virtual const std::string& method() const = 0;
  virtual const std::vector<std::string>& feature_names() const = 0;

  /// One finite effect estimate per input row; the feature layout must match
  /// the training data.
  virtual Eigen::VectorXd predict_tau(const Eigen::MatrixXd& features) const = 0;

  virtual nlohmann::json to_json() const = 0;
};

/// tau(x) = scale * (intercept + slopes . x). Every regression-based method
/// reduces to this form for prediction and serialization.
class LinearTauEstimator : public UpliftEstimator {
 public:
  LinearTauEstimator(std::string method, std::vector<std::string> feature_names,
                     double intercept, Eigen::VectorXd slopes, double scale);

  const std::string& method() const override { return method_; }
  const std::vector<std::string>& feature_names() const override { return feature_names_; }
  Eigen::VectorXd predict_tau(const Eigen::MatrixXd& features) const override;
  nlohmann::json to_json() const override;

  double effect_intercept() const { return intercept_; }
  const Eigen::VectorXd& effect_slopes() const { return slopes_; }
  double scale() const { return scale_; }

 private:
  std::string method_;
  std::vector<std::string> feature_names_;
  double intercept_;
  Eigen::VectorXd slopes_;
  double scale_;
};

class TwoModelEstimator : public LinearTauEstimator {
 public:
  TwoModelEstimator(std::vector<std::string> feature_names, LinearModel treated,
                    LinearModel control);
  const LinearModel& treated_model() const { return treated_; }
  const LinearModel& control_model() const { return control_; }

 private:
  LinearModel treated_;
  LinearModel control_;
};

class SingleModelTauEstimator : public LinearTauEstimator {
 public:
  SingleModelTauEstimator(std::string method, std::vector<std::string> feature_names,
                          LinearModel fit, double intercept, Eigen::VectorXd slopes,
                          double scale);
  const LinearModel& fit() const { return fit_; }

 private:
  LinearModel fit_;
};

/// Constant predictor; +1 gives the select-everyone ALL baseline.
class ConstantEstimator : public UpliftEstimator {
 public:
  explicit ConstantEstimator(double value, std::string method = "all");
  const std::string& method() const override { return method_; }
  const std::vector<std::string>& feature_names() const override { return feature_names_; }
  Eigen::VectorXd predict_tau(const Eigen::MatrixXd& features) const override;
  nlohmann::json to_json() const override;

 private:
  double value_;
  std::string method_;
  std::vector<std::string> feature_names_;
};

using TrueTauFn = std::function<double(const Eigen::RowVectorXd&)>;

/// Oracle predictor for synthetic data with a known truth function. Not
/// serializable by construction.
class OracleEstimator : public UpliftEstimator {
 public:
  explicit OracleEstimator(TrueTauFn true_tau);
  const std::string& method() const override { return method_; }
  const std::vector<std::string>& feature_names() const override { return feature_names_; }
  Eigen::VectorXd predict_tau(const Eigen::MatrixXd& features) const override;
  nlohmann::json to_json() const override;

 private:
  TrueTauFn true_tau_;
  std::string method_ = "best";
  std::vector<std::string> feature_names_;
};

/// Separate outcome regressions per arm; tau is their difference.
std::unique_ptr<TwoModelEstimator> two_model_fit(const Dataset& ds, double ridge = 0.0);

/// Regression on the signed outcome, inverse-propensity scaled with
/// p_hat = n_treated / n so the fit is unbiased for tau (x2 at balanced arms).
std::unique_ptr<SingleModelTauEstimator> transformed_outcome_fit(const Dataset& ds,
                                                                 double ridge = 0.0);

/// Regression of y on (2t-1)-signed features; tau(x) = 2 * slopes . x on the
/// untransformed features, intercept excluded from the effect.
std::unique_ptr<SingleModelTauEstimator> tian_fit(const Dataset& ds, double ridge = 0.0);

/// Regression on (x, t, t*x); tau(x) = beta_t + beta_tx . x.
std::unique_ptr<SingleModelTauEstimator> interaction_fit(const Dataset& ds, double ridge = 0.0);

std::unique_ptr<ConstantEstimator> baseline_all();
std::unique_ptr<OracleEstimator> baseline_best(TrueTauFn true_tau);

/// Rebuilds a serialized linear-form or constant estimator.
std::unique_ptr<UpliftEstimator> linear_estimator_from_json(const nlohmann::json& doc);

}  // namespace uplift
