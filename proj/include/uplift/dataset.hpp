#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace uplift {

/// Immutable sample from one randomized experiment: an n x K feature matrix,
/// a real outcome vector, a {0,1} treatment indicator and positive row
/// weights (all 1 unless set explicitly). All invariants are checked at
/// construction; instances are safe for concurrent reads.
class Dataset {
 public:
  Dataset(Eigen::MatrixXd features, std::vector<std::string> feature_names,
          Eigen::VectorXd outcome, Eigen::VectorXi treatment,
          Eigen::VectorXd weights = Eigen::VectorXd());

  Eigen::Index n() const { return outcome_.size(); }
  Eigen::Index num_features() const { return features_.cols(); }

  const Eigen::MatrixXd& features() const { return features_; }
  const std::vector<std::string>& feature_names() const { return feature_names_; }
  const Eigen::VectorXd& outcome() const { return outcome_; }
  const Eigen::VectorXi& treatment() const { return treatment_; }
  const Eigen::VectorXd& weights() const { return weights_; }

  Eigen::Index n_treated() const { return n_treated_; }
  Eigen::Index n_control() const { return n() - n_treated_; }
  bool outcome_is_binary() const;

  Dataset subset(std::span<const Eigen::Index> rows) const;

 private:
  Eigen::MatrixXd features_;
  std::vector<std::string> feature_names_;
  Eigen::VectorXd outcome_;
  Eigen::VectorXi treatment_;
  Eigen::VectorXd weights_;
  Eigen::Index n_treated_ = 0;
};

struct SplitPair {
  Dataset train;
  Dataset test;
};

struct SplitIndices {
  std::vector<Eigen::Index> train;
  std::vector<Eigen::Index> test;
};

/// Reads a headered numeric CSV. The named outcome/treatment columns become
/// the outcome and treatment vectors; every other column is a feature, in
/// file order. An optional weights column can be named as well.
Dataset load_csv(const std::string& path, const std::string& outcome_col = "y",
                 const std::string& treatment_col = "t",
                 const std::string& weights_col = "");

std::string dataset_to_csv(const Dataset& ds, bool include_weights = false);
void write_csv(const Dataset& ds, const std::string& path, bool include_weights = false);

/// Seeded uniform row partition with train size round(n * train_fraction).
SplitIndices split_indices(Eigen::Index n, double train_fraction, std::uint64_t seed);
SplitPair split_train_test(const Dataset& ds, double train_fraction, std::uint64_t seed);

/// Reweights rows so each arm carries total weight n/2: w = n / (2 * n_arm).
Dataset balance_weights(const Dataset& ds);

}  // namespace uplift
