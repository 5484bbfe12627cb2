#include "uplift/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "uplift/rng.hpp"
#include "uplift/text.hpp"

namespace uplift {

using nlohmann::json;

ModelKind model_kind_from_string(const std::string& name) {
  if (name == "all") return ModelKind::all;
  if (name == "best") return ModelKind::best;
  if (name == "two_model") return ModelKind::two_model;
  if (name == "transformed" || name == "transformed_outcome") return ModelKind::transformed_outcome;
  if (name == "tian") return ModelKind::tian;
  if (name == "interaction") return ModelKind::interaction;
  if (name == "tree") return ModelKind::tree;
  if (name == "forest") return ModelKind::forest;
  throw std::invalid_argument("unknown model '" + name + "'");
}

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::all: return "all";
    case ModelKind::best: return "best";
    case ModelKind::two_model: return "two_model";
    case ModelKind::transformed_outcome: return "transformed_outcome";
    case ModelKind::tian: return "tian";
    case ModelKind::interaction: return "interaction";
    case ModelKind::tree: return "tree";
    case ModelKind::forest: return "forest";
  }
  throw std::invalid_argument("unknown model kind");
}

double quantile_type7(std::vector<double> values, double p) {
  if (values.empty()) throw std::invalid_argument("quantile of empty set");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("quantile level must lie in [0, 1]");
  std::sort(values.begin(), values.end());
  const double h = p * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<size_t>(std::floor(h));
  if (lo + 1 >= values.size()) return values.back();
  const double frac = h - static_cast<double>(lo);
  return values[lo] + frac * (values[lo + 1] - values[lo]);
}

TrueTauFn law_true_tau(int law) {
  switch (law) {
    case 3:
      return [](const Eigen::RowVectorXd& x) { return x[0]; };
    case 4:
      return [](const Eigen::RowVectorXd& x) { return 0.5 * x[0]; };
    case 7:
      return [](const Eigen::RowVectorXd& x) { return law7_true_tau(x[0], x[2]); };
    default:
      throw std::invalid_argument("unknown law id " + std::to_string(law));
  }
}

std::unique_ptr<UpliftEstimator> fit_model(const ModelSpec& spec, const Dataset& train,
                                           const TrueTauFn& true_tau) {
  switch (spec.kind) {
    case ModelKind::all: return baseline_all();
    case ModelKind::best:
      if (!true_tau) throw std::runtime_error("best baseline needs a synthetic truth function");
      return baseline_best(true_tau);
    case ModelKind::two_model: return two_model_fit(train, spec.ridge);
    case ModelKind::transformed_outcome: return transformed_outcome_fit(train, spec.ridge);
    case ModelKind::tian: return tian_fit(train, spec.ridge);
    case ModelKind::interaction: return interaction_fit(train, spec.ridge);
    case ModelKind::tree: return std::make_unique<UpliftTree>(build_tree(train, spec.tree));
    case ModelKind::forest: return std::make_unique<UpliftForest>(build_forest(train, spec.forest));
  }
  throw std::invalid_argument("unknown model kind");
}

BenchmarkReport run_benchmark(const BenchmarkConfig& config) {
  if (config.repetitions < 1) throw std::invalid_argument("repetitions must be >= 1");
  if (config.models.empty()) throw std::invalid_argument("at least one model is required");

  TrueTauFn truth;
  Dataset data = [&] {
    if (config.source.synthetic()) {
      truth = law_true_tau(config.source.law);
      return generate(config.source.law, config.source.n, config.seed).dataset;
    }
    return load_csv(config.source.csv_path);
  }();
  for (const auto& spec : config.models)
    if (spec.kind == ModelKind::best && !config.source.synthetic())
      throw std::invalid_argument("the best baseline requires a synthetic source");

  std::vector<std::string> model_order;
  for (const auto& spec : config.models)
    model_order.push_back(spec.name.empty() ? to_string(spec.kind) : spec.name);

  BenchmarkReport report;
  for (int rep = 0; rep < config.repetitions; ++rep) {
    const std::uint64_t rep_seed = mix_seed(config.seed, static_cast<std::uint64_t>(rep));
    const SplitIndices idx = split_indices(data.n(), config.train_fraction, rep_seed);
    const Dataset train = data.subset(idx.train);
    const Dataset test = data.subset(idx.test);

    for (size_t m = 0; m < config.models.size(); ++m) {
      ModelSpec spec = config.models[m];
      // Stochastic models get independent per-(rep, model) seeds.
      spec.tree.seed = mix_seed(rep_seed, 2 * m);
      spec.forest.seed = mix_seed(rep_seed, 2 * m + 1);
      spec.forest.tree.seed = spec.tree.seed;

      BenchmarkRecord record;
      record.model = model_order[m];
      record.repetition = rep;
      try {
        const auto model = fit_model(spec, train, truth);
        const Eigen::VectorXd preds = model->predict_tau(test.features());

        std::vector<Eigen::Index> selected;
        for (Eigen::Index i = 0; i < preds.size(); ++i)
          if (preds[i] > 0.0) selected.push_back(i);
        record.n_selected = static_cast<Eigen::Index>(selected.size());
        record.selected_fraction =
            static_cast<double>(selected.size()) / static_cast<double>(test.n());
        if (selected.empty()) throw std::runtime_error("no rows with positive predicted effect");

        Eigen::VectorXd sel_y(record.n_selected);
        Eigen::VectorXi sel_t(record.n_selected);
        for (Eigen::Index i = 0; i < record.n_selected; ++i) {
          sel_y[i] = test.outcome()[selected[i]];
          sel_t[i] = test.treatment()[selected[i]];
        }
        record.effect = welch_effect(sel_y, sel_t);
        if (config.with_qini)
          record.qini = qini_index(qini_curve(test.outcome(), test.treatment(), preds));
        record.ok = true;
      } catch (const std::exception& e) {
        record.ok = false;
        record.failure = e.what();
      }
      report.records.push_back(std::move(record));
    }
  }
  report.summaries = summarize(report.records, model_order);
  return report;
}

std::vector<ModelSummary> summarize(const std::vector<BenchmarkRecord>& records,
                                    const std::vector<std::string>& model_order) {
  std::vector<ModelSummary> summaries;
  for (const auto& name : model_order) {
    ModelSummary s;
    s.model = name;
    std::vector<double> effects;
    for (const auto& rec : records) {
      if (rec.model != name) continue;
      if (rec.ok) {
        effects.push_back(rec.effect.effect);
      } else {
        ++s.n_failed;
      }
    }
    s.n_ok = static_cast<Eigen::Index>(effects.size());
    if (!effects.empty()) {
      s.q25 = quantile_type7(effects, 0.25);
      s.median = quantile_type7(effects, 0.5);
      s.q75 = quantile_type7(effects, 0.75);
      s.min = *std::min_element(effects.begin(), effects.end());
      s.max = *std::max_element(effects.begin(), effects.end());
    } else {
      s.q25 = s.median = s.q75 = s.min = s.max = std::numeric_limits<double>::quiet_NaN();
    }
    summaries.push_back(std::move(s));
  }
  return summaries;
}

std::string records_csv(const BenchmarkReport& report, bool with_qini) {
  std::string out = "model,repetition,effect,stderr,n_selected,status";
  if (with_qini) out += ",qini";
  out += '\n';
  for (const auto& rec : report.records) {
    out += rec.model;
    out += ',';
    out += std::to_string(rec.repetition);
    out += ',';
    out += rec.ok ? format_double(rec.effect.effect) : "";
    out += ',';
    out += rec.ok ? format_double(rec.effect.standard_error) : "";
    out += ',';
    out += std::to_string(rec.n_selected);
    out += ',';
    out += rec.ok ? "ok" : "failed: " + rec.failure;
    if (with_qini) {
      out += ',';
      if (rec.qini.has_value()) out += format_double(*rec.qini);
    }
    out += '\n';
  }
  return out;
}

json summary_json(const BenchmarkReport& report, const std::string& command_line) {
  json doc;
  if (!command_line.empty()) doc["command"] = command_line;
  json models = json::array();
  for (const auto& s : report.summaries) {
    json m;
    m["model"] = s.model;
    m["n_ok"] = s.n_ok;
    m["n_failed"] = s.n_failed;
    if (s.n_ok > 0) {
      m["quantiles"] = json{{"q25", s.q25}, {"median", s.median}, {"q75", s.q75}};
      m["min"] = s.min;
      m["max"] = s.max;
    }
    models.push_back(std::move(m));
  }
  doc["models"] = std::move(models);
  return doc;
}

namespace {

std::string svg_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

}  // namespace

std::string boxplot_svg(const BenchmarkReport& report) {
  // Box = quartiles, middle line = median, whiskers = min/max.
  const double box_width = 60.0, slot = 110.0, top = 40.0, bottom = 360.0, left = 70.0;
  double lo = 0.0, hi = 0.0;
  bool any = false;
  for (const auto& s : report.summaries) {
    if (s.n_ok == 0) continue;
    lo = any ? std::min(lo, s.min) : s.min;
    hi = any ? std::max(hi, s.max) : s.max;
    any = true;
  }
  if (!any) throw std::runtime_error("no successful records to plot");
  if (hi == lo) hi = lo + 1.0;
  const double pad = 0.05 * (hi - lo);
  lo -= pad;
  hi += pad;
  const auto y_of = [&](double v) { return bottom - (v - lo) / (hi - lo) * (bottom - top); };

  const double width = left + slot * static_cast<double>(report.summaries.size()) + 30.0;
  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + svg_num(width) +
                    "\" height=\"420\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg += "<line x1=\"" + svg_num(left - 10) + "\" y1=\"" + svg_num(top) + "\" x2=\"" +
         svg_num(left - 10) + "\" y2=\"" + svg_num(bottom) + "\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double v = lo + (hi - lo) * k / 4.0;
    svg += "<text x=\"5\" y=\"" + svg_num(y_of(v) + 4) + "\">" + svg_num(v) + "</text>\n";
    svg += "<line x1=\"" + svg_num(left - 14) + "\" y1=\"" + svg_num(y_of(v)) + "\" x2=\"" +
           svg_num(left - 10) + "\" y2=\"" + svg_num(y_of(v)) + "\" stroke=\"black\"/>\n";
  }
  double x = left + 20.0;
  for (const auto& s : report.summaries) {
    const double cx = x + box_width / 2.0;
    if (s.n_ok > 0) {
      svg += "<line x1=\"" + svg_num(cx) + "\" y1=\"" + svg_num(y_of(s.min)) + "\" x2=\"" +
             svg_num(cx) + "\" y2=\"" + svg_num(y_of(s.max)) + "\" stroke=\"black\"/>\n";
      for (double v : {s.min, s.max})
        svg += "<line x1=\"" + svg_num(cx - 12) + "\" y1=\"" + svg_num(y_of(v)) + "\" x2=\"" +
               svg_num(cx + 12) + "\" y2=\"" + svg_num(y_of(v)) + "\" stroke=\"black\"/>\n";
      svg += "<rect x=\"" + svg_num(x) + "\" y=\"" + svg_num(y_of(s.q75)) + "\" width=\"" +
             svg_num(box_width) + "\" height=\"" + svg_num(y_of(s.q25) - y_of(s.q75)) +
             "\" fill=\"white\" stroke=\"black\"/>\n";
      svg += "<line x1=\"" + svg_num(x) + "\" y1=\"" + svg_num(y_of(s.median)) + "\" x2=\"" +
             svg_num(x + box_width) + "\" y2=\"" + svg_num(y_of(s.median)) +
             "\" stroke=\"black\" stroke-width=\"2\"/>\n";
    }
    svg += "<text x=\"" + svg_num(cx) + "\" y=\"385\" text-anchor=\"middle\">" + s.model +
           "</text>\n";
    x += slot;
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace uplift
