#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "uplift/dataset.hpp"

namespace uplift {

/// A dataset reduced to a plain regression problem. The treatment column is
/// consumed by the transform: its information is folded into the outcome or
/// into the feature block.
struct TransformedDataset {
  Eigen::MatrixXd features;
  std::vector<std::string> feature_names;
  Eigen::VectorXd outcome;
  Eigen::VectorXd weights;
  std::string transform;
};

/// z = y * (2t - 1). The raw signed value is kept; any scale needed so the
/// regression targets the effect itself belongs to the estimator.
TransformedDataset signed_outcome(const Dataset& ds);

/// z = y*t + (1-y)*(1-t) for binary outcomes.
TransformedDataset class_transform(const Dataset& ds);

/// Every feature becomes (2t - 1) * x; the outcome is left alone.
TransformedDataset covariate_transform(const Dataset& ds);

/// Feature block becomes (x_1..x_K, t, t*x_1..t*x_K).
TransformedDataset interaction_augment(const Dataset& ds);

}  // namespace uplift
