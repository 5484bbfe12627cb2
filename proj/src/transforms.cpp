#include "uplift/transforms.hpp"

#include <stdexcept>

namespace uplift {

namespace {

Eigen::VectorXd sign_factor(const Dataset& ds) {
  Eigen::VectorXd s(ds.n());
  for (Eigen::Index i = 0; i < ds.n(); ++i) s[i] = ds.treatment()[i] == 1 ? 1.0 : -1.0;
  return s;
}

}  // namespace

TransformedDataset signed_outcome(const Dataset& ds) {
  TransformedDataset out;
  out.features = ds.features();
  out.feature_names = ds.feature_names();
  out.outcome = ds.outcome().cwiseProduct(sign_factor(ds));
  out.weights = ds.weights();
  out.transform = "signed_outcome";
  return out;
}

TransformedDataset class_transform(const Dataset& ds) {
  if (!ds.outcome_is_binary())
    throw std::invalid_argument("class_transform requires a binary outcome");
  TransformedDataset out;
  out.features = ds.features();
  out.feature_names = ds.feature_names();
  out.outcome.resize(ds.n());
  for (Eigen::Index i = 0; i < ds.n(); ++i) {
    const double y = ds.outcome()[i];
    const double t = ds.treatment()[i];
    out.outcome[i] = y * t + (1.0 - y) * (1.0 - t);
  }
  out.weights = ds.weights();
  out.transform = "class_transform";
  return out;
}

TransformedDataset covariate_transform(const Dataset& ds) {
  TransformedDataset out;
  out.features = sign_factor(ds).asDiagonal() * ds.features();
  out.feature_names = ds.feature_names();
  out.outcome = ds.outcome();
  out.weights = ds.weights();
  out.transform = "covariate_transform";
  return out;
}

TransformedDataset interaction_augment(const Dataset& ds) {
  const Eigen::Index n = ds.n();
  const Eigen::Index k = ds.num_features();
  TransformedDataset out;
  out.features.resize(n, 2 * k + 1);
  out.features.leftCols(k) = ds.features();
  for (Eigen::Index i = 0; i < n; ++i) {
    const double t = ds.treatment()[i];
    out.features(i, k) = t;
    out.features.row(i).tail(k) = t * ds.features().row(i);
  }
  out.feature_names = ds.feature_names();
  out.feature_names.push_back("t");
  for (const auto& name : ds.feature_names()) out.feature_names.push_back("t*" + name);
  out.outcome = ds.outcome();
  out.weights = ds.weights();
  out.transform = "interaction_augment";
  return out;
}

}  // namespace uplift
