#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "uplift/dataset.hpp"
#include "uplift/estimators.hpp"
#include "uplift/eval.hpp"
#include "uplift/forest.hpp"
#include "uplift/synth.hpp"
#include "uplift/tree.hpp"

namespace uplift {

enum class ModelKind { all, best, two_model, transformed_outcome, tian, interaction, tree, forest };

ModelKind model_kind_from_string(const std::string& name);
std::string to_string(ModelKind kind);

struct ModelSpec {
  ModelKind kind = ModelKind::all;
  std::string name;  // defaults to the kind's string form
  double ridge = 0.0;
  TreeConfig tree;
  ForestConfig forest;
};

/// Either a synthetic law (law in {3,4,7}, with n) or a CSV path.
struct BenchmarkSource {
  int law = 0;
  Eigen::Index n = 6000;
  std::string csv_path;

  bool synthetic() const { return law != 0; }
};

struct BenchmarkConfig {
  BenchmarkSource source;
  std::vector<ModelSpec> models;
  int repetitions = 100;
  double train_fraction = 0.8;
  std::uint64_t seed = 0;
  bool with_qini = false;
};

struct BenchmarkRecord {
  std::string model;
  int repetition = 0;
  bool ok = false;
  std::string failure;
  EffectEstimate effect;
  Eigen::Index n_selected = 0;
  double selected_fraction = 0.0;
  std::optional<double> qini;
};

struct ModelSummary {
  std::string model;
  Eigen::Index n_ok = 0;
  Eigen::Index n_failed = 0;
  double q25 = 0.0, median = 0.0, q75 = 0.0;
  double min = 0.0, max = 0.0;
};

struct BenchmarkReport {
  std::vector<BenchmarkRecord> records;
  std::vector<ModelSummary> summaries;
};

/// Linear interpolation between order statistics (type-7). `values` need not
/// be sorted.
double quantile_type7(std::vector<double> values, double p);

/// Fits one model spec on a training set. The truth function is required for
/// the BEST baseline and ignored otherwise.
std::unique_ptr<UpliftEstimator> fit_model(const ModelSpec& spec, const Dataset& train,
                                           const TrueTauFn& true_tau = nullptr);

/// Closed-form effect function of a synthetic law, for the BEST baseline.
TrueTauFn law_true_tau(int law);

/// Repeated split / fit / select(tau > 0) / measure protocol. The sample is
/// drawn once (synthetic) or loaded once (CSV); repetition seeds derive from
/// the master seed. Per-model failures are recorded, not thrown.
BenchmarkReport run_benchmark(const BenchmarkConfig& config);

std::vector<ModelSummary> summarize(const std::vector<BenchmarkRecord>& records,
                                    const std::vector<std::string>& model_order);

std::string records_csv(const BenchmarkReport& report, bool with_qini);
nlohmann::json summary_json(const BenchmarkReport& report, const std::string& command_line);
std::string boxplot_svg(const BenchmarkReport& report);

}  // namespace uplift
