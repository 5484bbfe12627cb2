#include "uplift/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "uplift/rng.hpp"
#include "uplift/text.hpp"

namespace uplift {

Dataset::Dataset(Eigen::MatrixXd features, std::vector<std::string> feature_names,
                 Eigen::VectorXd outcome, Eigen::VectorXi treatment, Eigen::VectorXd weights)
    : features_(std::move(features)),
      feature_names_(std::move(feature_names)),
      outcome_(std::move(outcome)),
      treatment_(std::move(treatment)),
      weights_(std::move(weights)) {
  const Eigen::Index n = outcome_.size();
  if (n == 0) throw std::invalid_argument("dataset is empty");
  if (features_.rows() != n || treatment_.size() != n)
    throw std::invalid_argument("dataset columns have unequal lengths");
  if (features_.cols() < 1) throw std::invalid_argument("dataset needs at least one feature");
  if (static_cast<Eigen::Index>(feature_names_.size()) != features_.cols())
    throw std::invalid_argument("feature name count does not match feature columns");
  if (weights_.size() == 0) {
    weights_ = Eigen::VectorXd::Ones(n);
  } else if (weights_.size() != n) {
    throw std::invalid_argument("weights length does not match row count");
  }
  if (!features_.allFinite() || !outcome_.allFinite() || !weights_.allFinite())
    throw std::invalid_argument("dataset contains non-finite values");
  if ((weights_.array() <= 0.0).any())
    throw std::invalid_argument("weights must be positive");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (treatment_[i] != 0 && treatment_[i] != 1)
      throw std::invalid_argument("invalid treatment value (must be 0 or 1)");
    n_treated_ += treatment_[i];
  }
}

bool Dataset::outcome_is_binary() const {
  return ((outcome_.array() == 0.0) || (outcome_.array() == 1.0)).all();
}

Dataset Dataset::subset(std::span<const Eigen::Index> rows) const {
  const Eigen::Index m = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXd f(m, num_features());
  Eigen::VectorXd y(m), w(m);
  Eigen::VectorXi t(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const Eigen::Index r = rows[i];
    if (r < 0 || r >= n()) throw std::out_of_range("subset row index out of range");
    f.row(i) = features_.row(r);
    y[i] = outcome_[r];
    t[i] = treatment_[r];
    w[i] = weights_[r];
  }
  return Dataset(std::move(f), feature_names_, std::move(y), std::move(t), std::move(w));
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  for (char c : line) {
    if (c == ',') {
      cells.push_back(cell);
      cell.clear();
    } else if (c != '\r') {
      cell.push_back(c);
    }
  }
  cells.push_back(cell);
  return cells;
}

}  // namespace

Dataset load_csv(const std::string& path, const std::string& outcome_col,
                 const std::string& treatment_col, const std::string& weights_col) {
  std::istringstream in(read_file(path));
  std::string line;
  if (!std::getline(in, line) || line.empty()) throw std::runtime_error("empty file '" + path + "'");
  const std::vector<std::string> header = split_line(line);

  int y_idx = -1, t_idx = -1, w_idx = -1;
  std::vector<int> feature_idx;
  std::vector<std::string> feature_names;
  for (int j = 0; j < static_cast<int>(header.size()); ++j) {
    if (header[j] == outcome_col) {
      y_idx = j;
    } else if (header[j] == treatment_col) {
      t_idx = j;
    } else if (!weights_col.empty() && header[j] == weights_col) {
      w_idx = j;
    } else {
      feature_idx.push_back(j);
      feature_names.push_back(header[j]);
    }
  }
  if (y_idx < 0) throw std::runtime_error("missing column '" + outcome_col + "'");
  if (t_idx < 0) throw std::runtime_error("missing column '" + treatment_col + "'");
  if (!weights_col.empty() && w_idx < 0) throw std::runtime_error("missing column '" + weights_col + "'");

  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    std::vector<std::string> cells = split_line(line);
    if (cells.size() != header.size())
      throw std::runtime_error("row with " + std::to_string(cells.size()) + " cells, expected " +
                               std::to_string(header.size()));
    std::vector<double> row(cells.size());
    for (size_t j = 0; j < cells.size(); ++j) row[j] = parse_double(cells[j]);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error("empty file '" + path + "' (no data rows)");

  const Eigen::Index n = static_cast<Eigen::Index>(rows.size());
  const Eigen::Index k = static_cast<Eigen::Index>(feature_idx.size());
  Eigen::MatrixXd features(n, k);
  Eigen::VectorXd outcome(n);
  Eigen::VectorXi treatment(n);
  Eigen::VectorXd weights;
  if (w_idx >= 0) weights.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    outcome[i] = rows[i][y_idx];
    const double t = rows[i][t_idx];
    if (t != 0.0 && t != 1.0) throw std::runtime_error("invalid treatment value in row " + std::to_string(i + 1));
    treatment[i] = static_cast<int>(t);
    if (w_idx >= 0) weights[i] = rows[i][w_idx];
    for (Eigen::Index j = 0; j < k; ++j) features(i, j) = rows[i][feature_idx[j]];
  }
  return Dataset(std::move(features), std::move(feature_names), std::move(outcome),
                 std::move(treatment), std::move(weights));
}

std::string dataset_to_csv(const Dataset& ds, bool include_weights) {
  std::string out = "y,t";
  if (include_weights) out += ",w";
  for (const auto& name : ds.feature_names()) {
    out += ',';
    out += name;
  }
  out += '\n';
  for (Eigen::Index i = 0; i < ds.n(); ++i) {
    out += format_double(ds.outcome()[i]);
    out += ',';
    out += std::to_string(ds.treatment()[i]);
    if (include_weights) {
      out += ',';
      out += format_double(ds.weights()[i]);
    }
    for (Eigen::Index j = 0; j < ds.num_features(); ++j) {
      out += ',';
      out += format_double(ds.features()(i, j));
    }
    out += '\n';
  }
  return out;
}

void write_csv(const Dataset& ds, const std::string& path, bool include_weights) {
  write_file_atomic(path, dataset_to_csv(ds, include_weights));
}

SplitIndices split_indices(Eigen::Index n, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw std::invalid_argument("train_fraction must lie in (0, 1)");
  const Eigen::Index n_train = static_cast<Eigen::Index>(std::lround(train_fraction * static_cast<double>(n)));
  if (n_train <= 0 || n_train >= n)
    throw std::invalid_argument("train_fraction yields an empty part");

  std::vector<Eigen::Index> perm(static_cast<size_t>(n));
  std::iota(perm.begin(), perm.end(), Eigen::Index{0});
  Rng rng(seed);
  for (Eigen::Index i = n - 1; i > 0; --i) {
    const auto j = static_cast<Eigen::Index>(draw_below(rng, static_cast<std::uint64_t>(i) + 1));
    std::swap(perm[i], perm[j]);
  }

  SplitIndices out;
  out.train.assign(perm.begin(), perm.begin() + n_train);
  out.test.assign(perm.begin() + n_train, perm.end());
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

SplitPair split_train_test(const Dataset& ds, double train_fraction, std::uint64_t seed) {
  const SplitIndices idx = split_indices(ds.n(), train_fraction, seed);
  return SplitPair{ds.subset(idx.train), ds.subset(idx.test)};
}

Dataset balance_weights(const Dataset& ds) {
  const Eigen::Index nt = ds.n_treated();
  const Eigen::Index nc = ds.n_control();
  if (nt == 0 || nc == 0) throw std::invalid_argument("balance_weights requires both arms non-empty");
  const double n = static_cast<double>(ds.n());
  const double w_treated = n / (2.0 * static_cast<double>(nt));
  const double w_control = n / (2.0 * static_cast<double>(nc));
  Eigen::VectorXd w(ds.n());
  for (Eigen::Index i = 0; i < ds.n(); ++i) w[i] = ds.treatment()[i] == 1 ? w_treated : w_control;
  return Dataset(ds.features(), ds.feature_names(), ds.outcome(), ds.treatment(), std::move(w));
}

}  // namespace uplift
