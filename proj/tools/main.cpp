#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "uplift/bench.hpp"
#include "uplift/dataset.hpp"
#include "uplift/eval.hpp"
#include "uplift/forest.hpp"
#include "uplift/model_io.hpp"
#include "uplift/synth.hpp"
#include "uplift/text.hpp"
#include "uplift/tree.hpp"

namespace {

using nlohmann::json;

std::string derive_truth_path(const std::string& out) {
  const auto dot = out.rfind(".csv");
  if (dot != std::string::npos && dot == out.size() - 4)
    return out.substr(0, dot) + "_truth.csv";
  return out + "_truth";
}

std::vector<std::string> split_comma(const std::string& list) {
  std::vector<std::string> items;
  std::string item;
  for (char c : list) {
    if (c == ',') {
      if (!item.empty()) items.push_back(item);
      item.clear();
    } else {
      item.push_back(c);
    }
  }
  if (!item.empty()) items.push_back(item);
  return items;
}

std::string join_args(int argc, char** argv) {
  std::string line;
  for (int i = 0; i < argc; ++i) {
    if (i > 0) line += ' ';
    line += argv[i];
  }
  return line;
}

struct TreeFlags {
  std::string criterion = "divergence_euclid";
  double theta_y = 0.0;
  Eigen::Index min_leaf = 10;
  int max_depth = 6;
  bool honest = false;
  bool no_smoothing = false;
  std::uint64_t seed = 0;

  uplift::TreeConfig to_config() const {
    uplift::TreeConfig config;
    config.criterion = uplift::split_criterion_from_string(criterion);
    config.outcome_threshold = theta_y;
    config.min_leaf_per_arm = min_leaf;
    config.max_depth = max_depth;
    config.honest = honest;
    config.laplace_smoothing = !no_smoothing;
    config.seed = seed;
    return config;
  }
};

struct ForestFlags {
  Eigen::Index n_trees = 100;
  double row_fraction = 1.0;
  double feature_fraction = 1.0;
  bool without_replacement = false;

  uplift::ForestConfig to_config(const uplift::TreeConfig& tree, std::uint64_t seed) const {
    uplift::ForestConfig config;
    config.n_trees = n_trees;
    config.row_fraction = row_fraction;
    config.feature_fraction = feature_fraction;
    config.with_replacement = !without_replacement;
    config.seed = seed;
    config.tree = tree;
    return config;
  }
};

void add_tree_flags(CLI::App* cmd, TreeFlags& flags, double default_theta,
                    Eigen::Index default_min_leaf, int default_max_depth) {
  flags.theta_y = default_theta;
  flags.min_leaf = default_min_leaf;
  flags.max_depth = default_max_depth;
  cmd->add_option("--criterion", flags.criterion,
                  "tree split criterion: divergence_abs_p, divergence_kl, divergence_euclid or "
                  "leaf_mse")
      ->capture_default_str();
  cmd->add_option("--theta-y", flags.theta_y,
                  "outcome threshold of the divergence indicator 1[y < theta] (use 0.5 for 0/1 "
                  "outcomes)")
      ->capture_default_str();
  cmd->add_option("--min-leaf", flags.min_leaf, "minimum rows per arm in a leaf")
      ->capture_default_str();
  cmd->add_option("--max-depth", flags.max_depth, "maximum tree depth (1 = single leaf)")
      ->capture_default_str();
  cmd->add_flag("--honest", flags.honest,
                "split rows 50/50 into structure and estimation halves");
  cmd->add_flag("--no-smoothing", flags.no_smoothing,
                "disable Laplace smoothing of the divergence indicator shares");
}

void add_forest_flags(CLI::App* cmd, ForestFlags& flags) {
  cmd->add_option("--trees", flags.n_trees, "number of trees")->capture_default_str();
  cmd->add_option("--row-fraction", flags.row_fraction, "rows sampled per tree")
      ->capture_default_str();
  cmd->add_option("--feature-fraction", flags.feature_fraction, "features sampled per tree")
      ->capture_default_str();
  cmd->add_flag("--without-replacement", flags.without_replacement,
                "sample rows without replacement instead of bootstrapping");
}

int run(int argc, char** argv) {
  CLI::App app{"uplift: treatment-effect estimators, Qini evaluation and benchmarks for "
               "randomized-experiment data"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "0.1.0");

  // generate
  auto* generate = app.add_subcommand("generate", "write a synthetic dataset CSV");
  int law = 7;
  Eigen::Index gen_n = 6000;
  std::uint64_t gen_seed = 0;
  std::string gen_out, truth_out;
  bool with_truth = false;
  generate->add_option("--law", law, "generating law id: 3, 4 or 7")->required();
  generate->add_option("--n", gen_n, "number of rows")->capture_default_str();
  generate->add_option("--seed", gen_seed, "RNG seed")->capture_default_str();
  generate->add_option("--out", gen_out, "output CSV path")->required();
  generate->add_flag("--with-truth", with_truth, "also write a CSV of per-row true effects");
  generate->add_option("--truth-out", truth_out, "path for the true-effect CSV");
  generate->callback([&] {
    const uplift::GeneratedSample sample = uplift::generate(law, gen_n, gen_seed);
    uplift::write_csv(sample.dataset, gen_out);
    if (with_truth || !truth_out.empty()) {
      std::string truth = "tau\n";
      for (Eigen::Index i = 0; i < sample.true_tau.size(); ++i)
        truth += uplift::format_double(sample.true_tau[i]) + "\n";
      uplift::write_file_atomic(truth_out.empty() ? derive_truth_path(gen_out) : truth_out, truth);
    }
  });

  // train
  auto* train = app.add_subcommand("train", "fit an estimator and write it as JSON");
  std::string train_data, method, model_out, outcome_col = "y", treatment_col = "t";
  double ridge = 0.0;
  bool balance = false;
  TreeFlags tree_flags;
  ForestFlags forest_flags;
  std::uint64_t train_seed = 0;
  train->add_option("--data", train_data, "training CSV")->required();
  train->add_option("--method", method,
                    "two_model, transformed, tian, interaction, tree or forest")
      ->required();
  train->add_option("--model-out", model_out, "output model path")->required();
  train->add_option("--outcome-col", outcome_col, "outcome column name")->capture_default_str();
  train->add_option("--treatment-col", treatment_col, "treatment column name")
      ->capture_default_str();
  train->add_option("--ridge", ridge, "ridge penalty for the linear methods")
      ->capture_default_str();
  train->add_flag("--balance", balance, "equalize total arm weights before fitting");
  train->add_option("--seed", train_seed, "seed for honest splitting / subsampling")
      ->capture_default_str();
  add_tree_flags(train, tree_flags, 0.0, 10, 6);
  add_forest_flags(train, forest_flags);
  train->callback([&] {
    uplift::Dataset ds = uplift::load_csv(train_data, outcome_col, treatment_col);
    if (balance) ds = uplift::balance_weights(ds);
    tree_flags.seed = train_seed;
    uplift::ModelSpec spec;
    spec.kind = uplift::model_kind_from_string(method);
    if (spec.kind == uplift::ModelKind::all || spec.kind == uplift::ModelKind::best)
      throw std::runtime_error("method '" + method + "' is a benchmark baseline, not trainable");
    spec.ridge = ridge;
    spec.tree = tree_flags.to_config();
    spec.forest = forest_flags.to_config(spec.tree, train_seed);
    const auto model = uplift::fit_model(spec, ds);
    uplift::save_model(*model, model_out);
  });

  // predict
  auto* predict = app.add_subcommand("predict", "apply a trained model to a dataset");
  std::string pred_data, model_path, pred_out;
  std::string pred_outcome_col = "y", pred_treatment_col = "t";
  predict->add_option("--data", pred_data, "input CSV")->required();
  predict->add_option("--model", model_path, "model JSON path")->required();
  predict->add_option("--out", pred_out, "output CSV of tau_hat")->required();
  predict->add_option("--outcome-col", pred_outcome_col, "outcome column name")
      ->capture_default_str();
  predict->add_option("--treatment-col", pred_treatment_col, "treatment column name")
      ->capture_default_str();
  predict->callback([&] {
    const uplift::Dataset ds = uplift::load_csv(pred_data, pred_outcome_col, pred_treatment_col);
    const auto model = uplift::load_model(model_path);
    if (!model->feature_names().empty() && model->feature_names() != ds.feature_names())
      throw std::runtime_error("feature columns do not match the model's training schema");
    const Eigen::VectorXd tau = model->predict_tau(ds.features());
    std::string out = "tau_hat\n";
    for (Eigen::Index i = 0; i < tau.size(); ++i) out += uplift::format_double(tau[i]) + "\n";
    uplift::write_file_atomic(pred_out, out);
  });

  // qini
  auto* qini = app.add_subcommand("qini", "Qini curve and index for a predictions CSV");
  std::string qini_data, pred_col = "tau_hat", curve_out, qini_json_out;
  std::string qini_outcome_col = "y", qini_treatment_col = "t";
  int grid_steps = 20;
  qini->add_option("--data", qini_data, "CSV with outcome, treatment and prediction columns")
      ->required();
  qini->add_option("--outcome-col", qini_outcome_col, "outcome column name")
      ->capture_default_str();
  qini->add_option("--treatment-col", qini_treatment_col, "treatment column name")
      ->capture_default_str();
  qini->add_option("--pred-col", pred_col, "prediction column name")->capture_default_str();
  qini->add_option("--curve-out", curve_out, "write the curve as CSV (alpha,tau_at_alpha,qini)");
  qini->add_option("--json-out", qini_json_out, "write index + validation fit as JSON");
  qini->add_option("--grid-steps", grid_steps, "alpha grid resolution")->capture_default_str();
  qini->callback([&] {
    const uplift::Dataset ds = uplift::load_csv(qini_data, qini_outcome_col, qini_treatment_col);
    Eigen::Index pred_idx = -1;
    for (Eigen::Index j = 0; j < ds.num_features(); ++j)
      if (ds.feature_names()[j] == pred_col) pred_idx = j;
    if (pred_idx < 0) throw std::runtime_error("missing column '" + pred_col + "'");
    const Eigen::VectorXd preds = ds.features().col(pred_idx);

    std::vector<double> grid;
    for (int k = 0; k <= grid_steps; ++k)
      grid.push_back(static_cast<double>(k) / static_cast<double>(grid_steps));
    const uplift::QiniCurve curve = uplift::qini_curve(ds.outcome(), ds.treatment(), preds, grid);

    if (!curve_out.empty()) {
      std::string csv = "alpha,tau_at_alpha,qini\n";
      for (const auto& p : curve.points) {
        csv += uplift::format_double(p.alpha);
        csv += ',';
        if (p.defined && std::isfinite(p.tau_at_alpha))
          csv += uplift::format_double(p.tau_at_alpha);
        csv += ',';
        if (p.defined) csv += uplift::format_double(p.qini);
        csv += '\n';
      }
      uplift::write_file_atomic(curve_out, csv);
    }

    json doc;
    doc["qini_index"] = uplift::qini_index(curve);
    doc["tau_rnd"] = curve.tau_rnd;
    try {
      const uplift::ValidationFit fit =
          uplift::validation_regression(ds.outcome(), ds.treatment(), preds);
      json coefficients;
      for (int i = 0; i < 4; ++i) {
        json c;
        c["estimate"] = fit.coefficient(i);
        if (fit.fit.has_standard_errors) {
          c["standard_error"] = fit.standard_error(i);
          c["t_statistic"] = fit.t_statistic(i);
        }
        coefficients["alpha_" + std::to_string(i)] = std::move(c);
      }
      doc["validation"] = std::move(coefficients);
    } catch (const std::exception& e) {
      doc["validation_error"] = e.what();
    }
    const std::string text = doc.dump(2) + "\n";
    if (qini_json_out.empty())
      std::cout << text;
    else
      uplift::write_file_atomic(qini_json_out, text);
  });

  // validate
  auto* validate = app.add_subcommand(
      "validate", "regression of y on (1, t, tau_hat, t*tau_hat) with t-statistics");
  std::string val_data, val_pred_col = "tau_hat", val_json_out;
  std::string val_outcome_col = "y", val_treatment_col = "t";
  validate->add_option("--data", val_data, "CSV with outcome, treatment and prediction columns")
      ->required();
  validate->add_option("--outcome-col", val_outcome_col, "outcome column name")
      ->capture_default_str();
  validate->add_option("--treatment-col", val_treatment_col, "treatment column name")
      ->capture_default_str();
  validate->add_option("--pred-col", val_pred_col, "prediction column name")
      ->capture_default_str();
  validate->add_option("--json-out", val_json_out, "output JSON path (default: stdout)");
  validate->callback([&] {
    const uplift::Dataset ds = uplift::load_csv(val_data, val_outcome_col, val_treatment_col);
    Eigen::Index pred_idx = -1;
    for (Eigen::Index j = 0; j < ds.num_features(); ++j)
      if (ds.feature_names()[j] == val_pred_col) pred_idx = j;
    if (pred_idx < 0) throw std::runtime_error("missing column '" + val_pred_col + "'");
    const uplift::ValidationFit fit =
        uplift::validation_regression(ds.outcome(), ds.treatment(), ds.features().col(pred_idx));
    json doc;
    for (int i = 0; i < 4; ++i) {
      json c;
      c["estimate"] = fit.coefficient(i);
      if (fit.fit.has_standard_errors) {
        c["standard_error"] = fit.standard_error(i);
        c["t_statistic"] = fit.t_statistic(i);
      }
      doc["alpha_" + std::to_string(i)] = std::move(c);
    }
    const std::string text = doc.dump(2) + "\n";
    if (val_json_out.empty())
      std::cout << text;
    else
      uplift::write_file_atomic(val_json_out, text);
  });

  // benchmark
  auto* benchmark = app.add_subcommand(
      "benchmark", "repeated split/fit/select protocol with per-model summaries");
  int bench_law = 0;
  std::string bench_data, out_dir;
  Eigen::Index bench_n = 6000;
  std::string models = "all,best,two_model,tian,tree,forest";
  int reps = 100;
  double train_fraction = 0.8;
  std::uint64_t bench_seed = 0;
  bool with_qini = false;
  double bench_ridge = 0.0;
  TreeFlags bench_tree;
  ForestFlags bench_forest;
  auto* law_opt = benchmark->add_option("--law", bench_law, "synthetic law id: 3, 4 or 7");
  auto* data_opt = benchmark->add_option("--data", bench_data, "CSV source instead of a law");
  law_opt->excludes(data_opt);
  benchmark->add_option("--n", bench_n, "rows to generate for a synthetic source")
      ->capture_default_str();
  benchmark->add_option("--models", models, "comma list from: all, best, two_model, "
                                            "transformed, tian, interaction, tree, forest")
      ->capture_default_str();
  benchmark->add_option("--reps", reps, "number of repetitions")->capture_default_str();
  benchmark->add_option("--train-fraction", train_fraction, "train share of each split")
      ->capture_default_str();
  benchmark->add_option("--seed", bench_seed, "master seed")->capture_default_str();
  benchmark->add_option("--out-dir", out_dir, "directory for records.csv, summary.json, "
                                              "boxplot.svg")
      ->required();
  benchmark->add_flag("--with-qini", with_qini, "also record the Qini index per repetition");
  benchmark->add_option("--ridge", bench_ridge, "ridge penalty for the linear methods")
      ->capture_default_str();
  // The benchmark defaults target the binary-outcome protocol: the
  // divergence indicator needs theta inside (0, 1] to see a 0/1 outcome.
  add_tree_flags(benchmark, bench_tree, 0.5, 50, 5);
  add_forest_flags(benchmark, bench_forest);
  const std::string command_line = join_args(argc, argv);
  benchmark->callback([&] {
    if (bench_law == 0 && bench_data.empty())
      throw std::runtime_error("either --law or --data is required");
    uplift::BenchmarkConfig config;
    config.source.law = bench_law;
    config.source.n = bench_n;
    config.source.csv_path = bench_data;
    config.repetitions = reps;
    config.train_fraction = train_fraction;
    config.seed = bench_seed;
    config.with_qini = with_qini;
    for (const auto& name : split_comma(models)) {
      uplift::ModelSpec spec;
      spec.kind = uplift::model_kind_from_string(name);
      spec.name = uplift::to_string(spec.kind);
      spec.ridge = bench_ridge;
      spec.tree = bench_tree.to_config();
      spec.forest = bench_forest.to_config(spec.tree, 0);
      config.models.push_back(std::move(spec));
    }
    const uplift::BenchmarkReport report = uplift::run_benchmark(config);
    std::filesystem::create_directories(out_dir);
    const std::filesystem::path dir(out_dir);
    uplift::write_file_atomic((dir / "records.csv").string(),
                              uplift::records_csv(report, with_qini));
    uplift::write_file_atomic((dir / "summary.json").string(),
                              uplift::summary_json(report, command_line).dump(2) + "\n");
    uplift::write_file_atomic((dir / "boxplot.svg").string(), uplift::boxplot_svg(report));
  });

  CLI11_PARSE(app, argc, argv);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
