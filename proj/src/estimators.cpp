#include "uplift/estimators.hpp"

#include <stdexcept>
#include <utility>

#include "uplift/transforms.hpp"

namespace uplift {

using nlohmann::json;

namespace {

void check_feature_count(Eigen::Index got, Eigen::Index want) {
  if (got != want)
    throw std::invalid_argument("feature count " + std::to_string(got) +
                                " does not match model (" + std::to_string(want) + ")");
}

std::vector<Eigen::Index> arm_rows(const Dataset& ds, int arm) {
  std::vector<Eigen::Index> rows;
  for (Eigen::Index i = 0; i < ds.n(); ++i)
    if (ds.treatment()[i] == arm) rows.push_back(i);
  return rows;
}

}  // namespace

LinearTauEstimator::LinearTauEstimator(std::string method, std::vector<std::string> feature_names,
                                       double intercept, Eigen::VectorXd slopes, double scale)
    : method_(std::move(method)),
      feature_names_(std::move(feature_names)),
      intercept_(intercept),
      slopes_(std::move(slopes)),
      scale_(scale) {
  if (static_cast<Eigen::Index>(feature_names_.size()) != slopes_.size())
    throw std::invalid_argument("slope count does not match feature names");
}

Eigen::VectorXd LinearTauEstimator::predict_tau(const Eigen::MatrixXd& features) const {
  check_feature_count(features.cols(), slopes_.size());
  return scale_ * (Eigen::VectorXd::Constant(features.rows(), intercept_) + features * slopes_);
}

json LinearTauEstimator::to_json() const {
  json doc;
  doc["method"] = method_;
  doc["feature_names"] = feature_names_;
  doc["intercept"] = intercept_;
  doc["slopes"] = std::vector<double>(slopes_.begin(), slopes_.end());
  doc["scale"] = scale_;
  return doc;
}

TwoModelEstimator::TwoModelEstimator(std::vector<std::string> feature_names, LinearModel treated,
                                     LinearModel control)
    : LinearTauEstimator("two_model", std::move(feature_names),
                         treated.intercept() - control.intercept(),
                         treated.slopes() - control.slopes(), 1.0),
      treated_(std::move(treated)),
      control_(std::move(control)) {}

SingleModelTauEstimator::SingleModelTauEstimator(std::string method,
                                                 std::vector<std::string> feature_names,
                                                 LinearModel fit, double intercept,
                                                 Eigen::VectorXd slopes, double scale)
    : LinearTauEstimator(std::move(method), std::move(feature_names), intercept,
                         std::move(slopes), scale),
      fit_(std::move(fit)) {}

ConstantEstimator::ConstantEstimator(double value, std::string method)
    : value_(value), method_(std::move(method)) {}

Eigen::VectorXd ConstantEstimator::predict_tau(const Eigen::MatrixXd& features) const {
  return Eigen::VectorXd::Constant(features.rows(), value_);
}

json ConstantEstimator::to_json() const {
  return json{{"method", method_}, {"value", value_}};
}

OracleEstimator::OracleEstimator(TrueTauFn true_tau) : true_tau_(std::move(true_tau)) {
  if (!true_tau_) throw std::invalid_argument("baseline_best requires a truth function");
}

Eigen::VectorXd OracleEstimator::predict_tau(const Eigen::MatrixXd& features) const {
  Eigen::VectorXd out(features.rows());
  for (Eigen::Index i = 0; i < features.rows(); ++i) out[i] = true_tau_(features.row(i));
  return out;
}

json OracleEstimator::to_json() const {
  throw std::runtime_error("best baseline is an oracle and cannot be serialized");
}

std::unique_ptr<TwoModelEstimator> two_model_fit(const Dataset& ds, double ridge) {
  const auto treated_rows = arm_rows(ds, 1);
  const auto control_rows = arm_rows(ds, 0);
  const Eigen::Index need = ds.num_features() + 2;
  if (static_cast<Eigen::Index>(treated_rows.size()) < need ||
      static_cast<Eigen::Index>(control_rows.size()) < need)
    throw std::runtime_error("an arm is too small to fit a per-arm model");
  const Dataset treated = ds.subset(treated_rows);
  const Dataset control = ds.subset(control_rows);
  LinearModel mu1 = fit_ols(treated.features(), treated.outcome(), treated.weights(), ridge);
  LinearModel mu0 = fit_ols(control.features(), control.outcome(), control.weights(), ridge);
  return std::make_unique<TwoModelEstimator>(ds.feature_names(), std::move(mu1), std::move(mu0));
}

std::unique_ptr<SingleModelTauEstimator> transformed_outcome_fit(const Dataset& ds, double ridge) {
  const Eigen::Index nt = ds.n_treated();
  const Eigen::Index nc = ds.n_control();
  if (nt == 0 || nc == 0)
    throw std::runtime_error("transformed_outcome_fit requires both arms non-empty");
  TransformedDataset z = signed_outcome(ds);
  // Inverse-propensity scale: z / (t p + (1-t)(1-p)) with p = n_t / n makes
  // E[z | x] = tau(x); reduces to 2z at balanced arms.
  const double p = static_cast<double>(nt) / static_cast<double>(ds.n());
  for (Eigen::Index i = 0; i < ds.n(); ++i) {
    const double denom = ds.treatment()[i] == 1 ? p : 1.0 - p;
    z.outcome[i] /= denom;
  }
  LinearModel fit = fit_ols(z.features, z.outcome, z.weights, ridge);
  const double intercept = fit.intercept();
  Eigen::VectorXd slopes = fit.slopes();
  return std::make_unique<SingleModelTauEstimator>("transformed_outcome", ds.feature_names(),
                                                   std::move(fit), intercept, std::move(slopes),
                                                   1.0);
}

std::unique_ptr<SingleModelTauEstimator> tian_fit(const Dataset& ds, double ridge) {
  if (ds.n_treated() == 0 || ds.n_control() == 0)
    throw std::runtime_error("tian_fit requires both arms non-empty");
  const TransformedDataset star = covariate_transform(ds);
  LinearModel fit = fit_ols(star.features, star.outcome, star.weights, ridge);
  // The intercept absorbs E[y]; the effect lives in the slopes.
  Eigen::VectorXd slopes = fit.slopes();
  return std::make_unique<SingleModelTauEstimator>("tian", ds.feature_names(), std::move(fit),
                                                   0.0, std::move(slopes), 2.0);
}

std::unique_ptr<SingleModelTauEstimator> interaction_fit(const Dataset& ds, double ridge) {
  const Eigen::Index k = ds.num_features();
  if (ds.n() <= 2 * k + 2)
    throw std::runtime_error("interaction_fit needs more rows than 2K + 2");
  const TransformedDataset aug = interaction_augment(ds);
  LinearModel fit = fit_ols(aug.features, aug.outcome, aug.weights, ridge);
  // Coefficients: [intercept, x_1..x_K, t, t*x_1..t*x_K].
  const double beta_t = fit.coefficients[k + 1];
  Eigen::VectorXd beta_tx = fit.coefficients.tail(k);
  return std::make_unique<SingleModelTauEstimator>("interaction", ds.feature_names(),
                                                   std::move(fit), beta_t, std::move(beta_tx),
                                                   1.0);
}

std::unique_ptr<ConstantEstimator> baseline_all() {
  return std::make_unique<ConstantEstimator>(1.0, "all");
}

std::unique_ptr<OracleEstimator> baseline_best(TrueTauFn true_tau) {
  return std::make_unique<OracleEstimator>(std::move(true_tau));
}

std::unique_ptr<UpliftEstimator> linear_estimator_from_json(const json& doc) {
  const std::string method = doc.at("method").get<std::string>();
  if (method == "all") {
    return std::make_unique<ConstantEstimator>(doc.at("value").get<double>());
  }
  if (method == "two_model" || method == "transformed_outcome" || method == "tian" ||
      method == "interaction") {
    auto names = doc.at("feature_names").get<std::vector<std::string>>();
    const auto slope_values = doc.at("slopes").get<std::vector<double>>();
    Eigen::VectorXd slopes =
        Eigen::Map<const Eigen::VectorXd>(slope_values.data(), slope_values.size());
    return std::make_unique<LinearTauEstimator>(method, std::move(names),
                                                doc.at("intercept").get<double>(),
                                                std::move(slopes), doc.at("scale").get<double>());
  }
  throw std::runtime_error("unknown estimator method '" + method + "'");
}

}  // namespace uplift
