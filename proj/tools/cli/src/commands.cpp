#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "noxcast/csv.hpp"
#include "noxcast/dataset.hpp"
#include "noxcast/error.hpp"
#include "noxcast/eval.hpp"
#include "noxcast/impute.hpp"
#include "noxcast/ingest.hpp"
#include "noxcast/model_io.hpp"
#include "noxcast/nn.hpp"
#include "noxcast/sweep.hpp"
#include "noxcast/timestamp.hpp"
#include "noxcast/train.hpp"
#include "noxcast_cli/app.hpp"

namespace noxcast::cli {

namespace {

using ojson = nlohmann::ordered_json;

// Non-finite metrics (e.g. a diverged sweep cell) become null.
ojson number(double value) { return std::isfinite(value) ? ojson(value) : ojson(nullptr); }

std::ofstream open_artifact(const RunConfig& config, const std::string& name) {
  std::ofstream out(config.out / name, std::ios::binary);
  if (!out) throw Error(ErrorCode::UnreadableFile, "cannot write " + (config.out / name).string());
  return out;
}

void write_json(const RunConfig& config, const std::string& name, const ojson& doc) {
  auto out = open_artifact(config, name);
  out << doc.dump(2) << '\n';
}

void prepare_output(const RunConfig& config) {
  std::filesystem::create_directories(config.out);
  write_json(config, "effective_config.json", to_json(config));
}

struct Loaded {
  ingest::TimeSeries series;
  std::size_t n_records = 0;
  std::size_t rejected_cells = 0;
};

Loaded load_series(const RunConfig& config) {
  if (config.input.empty()) throw ConfigError("input", "no input CSV given");
  auto parsed = ingest::parse_csv(config.input, config.columns);
  Loaded loaded{ingest::regularize(parsed.records), parsed.records.size(), parsed.rejected_cells};
  return loaded;
}

impute::ImputationModel fit_imputer(const RunConfig& config, const ingest::TimeSeries& series) {
  return impute::fit_ols(series, config.target, config.predictors, config.seed);
}

// The target as a gap-free series. Gaps are filled by stochastic regression
// imputation with the configured predictors and seed.
std::vector<double> complete_target(const RunConfig& config, std::ostream& log) {
  const auto loaded = load_series(config);
  const auto missing = loaded.series.n_missing(config.target);
  if (missing == 0) return loaded.series.complete(config.target);
  log << "imputing " << missing << " missing " << config.target << " values\n";
  const auto result = impute::impute_series(loaded.series, fit_imputer(config, loaded.series), config.histogram_bins);
  return result.series.complete(config.target);
}

eval::EvalOptions eval_options(const RunConfig& config) {
  eval::EvalOptions opts;
  opts.units = config.units == "original" ? eval::Units::Original : eval::Units::Scaled;
  opts.mase_scale = config.mase_scale == "train" ? eval::MaseScale::TrainSegment : eval::MaseScale::TestSegment;
  return opts;
}

ojson variable_summary(const ingest::TimeSeries& series, const std::string& name) {
  return {{"present", series.n_present(name)}, {"missing", series.n_missing(name)}};
}

// ---------------------------------------------------------------- ingest

void run_ingest(const RunConfig& config, std::ostream& log) {
  const auto loaded = load_series(config);
  const auto& s = loaded.series;
  {
    auto out = open_artifact(config, "series.csv");
    ingest::write_series_csv(out, s, config.columns);
  }
  ojson vars;
  for (const auto& name : s.names()) vars[name] = variable_summary(s, name);
  write_json(config, "ingest_summary.json",
             {{"input", config.input.string()},
              {"station", s.station()},
              {"records", loaded.n_records},
              {"rejected_cells", loaded.rejected_cells},
              {"grid_length", s.length()},
              {"step_minutes", ingest::TimeSeries::kStepMinutes},
              {"start", format_timestamp(s.time_at(0))},
              {"end", format_timestamp(s.time_at(s.length() - 1))},
              {"variables", vars}});
  log << "ingested " << loaded.n_records << " records onto a grid of " << s.length() << " slots\n";
}

// ---------------------------------------------------------------- impute

void run_impute(const RunConfig& config, std::ostream& log) {
  const auto loaded = load_series(config);
  const auto model = fit_imputer(config, loaded.series);
  const auto result = impute::impute_series(loaded.series, model, config.histogram_bins);
  {
    auto out = open_artifact(config, "imputed.csv");
    ingest::write_series_csv(out, result.series, config.columns);
  }
  const auto& r = result.report;
  ojson coefficients = ojson::object();
  for (std::size_t k = 0; k < model.predictors.size(); ++k) {
    coefficients[model.predictors[k]] = model.coefficients[k];
  }
  write_json(config, "imputation_report.json",
             {{"target", model.target},
              {"predictors", model.predictors},
              {"intercept", model.intercept},
              {"coefficients", coefficients},
              {"residual_sigma", model.residual_sigma},
              {"complete_rows", model.n_complete},
              {"seed", model.seed},
              {"imputed", r.n_imputed},
              {"from_regression", r.n_regression},
              {"from_interpolation", r.n_fallback},
              {"clamped_to_zero", r.n_clamped},
              {"mean_before", r.mean_before},
              {"mean_after", r.mean_after},
              {"variance_before", r.var_before},
              {"variance_after", r.var_after}});
  {
    auto out = open_artifact(config, "imputation_histogram.csv");
    csv::write_row(out, {"bin_lo", "bin_hi", "count_before", "count_after"});
    for (std::size_t b = 0; b < r.histogram_before.size(); ++b) {
      csv::write_row(out, {csv::format_number(r.bin_edges[b]), csv::format_number(r.bin_edges[b + 1]),
                           std::to_string(r.histogram_before[b]), std::to_string(r.histogram_after[b])});
    }
  }
  log << "imputed " << r.n_imputed << " " << model.target << " values (" << r.n_regression << " by regression, "
      << r.n_fallback << " by interpolation)\n";
}

// ---------------------------------------------------------------- train

ModelArtifact train_model(const RunConfig& config, const std::vector<double>& values, train::TrainLog& log_out) {
  const auto ds = dataset::build_dataset(values, config.window, config.gap, config.test_fraction);
  const auto cfg = config.train_config();
  auto result = train::train(nn::init_params(config.hidden, 1, config.seed, config.forget_bias_one), ds, cfg);
  log_out = std::move(result.log);
  ModelArtifact model;
  model.params = std::move(result.params);
  model.window = config.window;
  model.gap = config.gap;
  model.scaler = ds.scaler;
  model.target = config.target;
  model.seed = config.seed;
  model.training = cfg;
  return model;
}

void run_train(const RunConfig& config, std::ostream& log) {
  const auto values = complete_target(config, log);
  train::TrainLog train_log;
  const auto model = train_model(config, values, train_log);
  {
    auto out = open_artifact(config, "train_log.csv");
    train::write_log_csv(out, train_log, config.timing);
  }
  if (train_log.diverged) {
    throw Error(ErrorCode::Diverged,
                "training diverged at epoch " + std::to_string(train_log.diverged_epoch) + "; no model written");
  }
  save_model(config.out / "model.json", model);
  const auto& last = train_log.epochs.empty() ? train::EpochLog{} : train_log.epochs.back();
  log << "trained " << train_log.epochs.size() << " epochs; final train loss " << last.loss << ", rmse " << last.rmse
      << "\n";
}

// ---------------------------------------------------------------- evaluate

ModelArtifact load_matching_model(const RunConfig& config) {
  auto model = load_model(config.model_path());
  if (config.is_explicit("window") && config.window != model.window) {
    throw ConfigError("window", "config window " + std::to_string(config.window) + " does not match model window " +
                                    std::to_string(model.window));
  }
  if (config.is_explicit("gap") && config.gap != model.gap) {
    throw ConfigError("gap", "config gap " + std::to_string(config.gap) + " does not match model gap " +
                                 std::to_string(model.gap));
  }
  if (config.is_explicit("target") && config.target != model.target) {
    throw ConfigError("target", "config target " + config.target + " does not match model target " + model.target);
  }
  return model;
}

ojson metrics_json(const eval::EvalReport& r, const ModelArtifact& model, const RunConfig& config) {
  return {{"target", model.target},
          {"window", model.window},
          {"gap", model.gap},
          {"hidden", model.params.hidden()},
          {"units", config.units},
          {"mase_scale", config.mase_scale},
          {"n_train", r.n_train},
          {"n_test", r.n_test},
          {"rmse_train", number(r.rmse_train)},
          {"rmse_test", number(r.rmse_test)},
          {"rmse_gap", number(r.rmse_gap)},
          {"mase_test", number(r.mase_test)},
          {"accuracy", number(r.accuracy)},
          {"overfit_verdict", eval::to_string(r.overfit_verdict)}};
}

eval::EvalReport evaluate_model(const RunConfig& config, const ModelArtifact& model, const std::vector<double>& values) {
  auto ds = dataset::make_windows(values, model.window, model.gap, model.scaler);
  ds = dataset::split_chronological(std::move(ds), config.test_fraction);
  return eval::evaluate(model.params, ds, eval_options(config));
}

void write_eval_artifacts(const RunConfig& config, const ModelArtifact& model, const eval::EvalReport& report) {
  write_json(config, "metrics.json", metrics_json(report, model, config));
  auto out = open_artifact(config, "predictions.csv");
  eval::write_predictions_csv(out, report);
}

void run_evaluate(const RunConfig& config, std::ostream& log) {
  const auto model = load_matching_model(config);
  auto effective = config;
  effective.target = model.target;
  const auto values = complete_target(effective, log);
  const auto report = evaluate_model(config, model, values);
  write_eval_artifacts(config, model, report);
  log << "test accuracy " << 100.0 * report.accuracy << "%, MASE " << report.mase_test << ", RMSE train/test "
      << report.rmse_train << "/" << report.rmse_test << " (" << eval::to_string(report.overfit_verdict) << ")\n";
}

// ---------------------------------------------------------------- sweep

ojson sweep_best_json(const sweep::SweepResult& result) {
  const auto& best = *result.best;
  ojson doc{{"window", best.window}, {"learning_rate", best.learning_rate}, {"hidden", best.hidden}};
  for (const auto& row : result.rows) {
    if (row.cell == best) {
      doc["seed"] = row.seed;
      doc["accuracy"] = number(row.accuracy);
      doc["rmse_test"] = number(row.rmse_test);
      doc["rmse_train"] = number(row.rmse_train);
      doc["mase_test"] = number(row.mase_test);
    }
  }
  std::size_t diverged = 0;
  for (const auto& row : result.rows) diverged += row.diverged ? 1 : 0;
  doc["cells"] = result.rows.size();
  doc["diverged_cells"] = diverged;
  return doc;
}

sweep::SweepResult run_sweep_grid(const RunConfig& config, const std::vector<double>& values) {
  sweep::SweepGrid grid;
  grid.windows = config.windows;
  grid.learning_rates = config.learning_rates;
  grid.hidden_sizes = config.hidden_sizes;
  grid.base = config.train_config();
  grid.gap = config.gap;
  grid.test_fraction = config.test_fraction;
  grid.forget_bias_one = config.forget_bias_one;
  return sweep::run_grid(values, grid, config.workers);
}

void write_sweep_artifacts(const RunConfig& config, const sweep::SweepResult& result) {
  {
    auto out = open_artifact(config, "sweep.csv");
    sweep::write_rows_csv(out, result.rows, config.timing);
  }
  if (!result.best) throw Error(ErrorCode::AllDiverged, "every sweep cell diverged");
  const auto& best = *result.best;
  // Marginal slices: accuracy against window at the configured learning rate,
  // and against learning rate at the configured window. Settings absent from
  // the grid fall back to the best cell's.
  const auto in = [](const auto& axis, auto value) { return std::find(axis.begin(), axis.end(), value) != axis.end(); };
  const double lr = in(config.learning_rates, config.training.learning_rate) ? config.training.learning_rate
                                                                               : best.learning_rate;
  const std::size_t window = in(config.windows, config.window) ? config.window : best.window;
  const std::size_t hidden = in(config.hidden_sizes, config.hidden) ? config.hidden : best.hidden;
  {
    auto out = open_artifact(config, "sweep_by_window.csv");
    sweep::write_rows_csv(out, sweep::window_slice(result.rows, lr, hidden), config.timing);
  }
  {
    auto out = open_artifact(config, "sweep_by_lr.csv");
    sweep::write_rows_csv(out, sweep::learning_rate_slice(result.rows, window, hidden), config.timing);
  }
  write_json(config, "sweep_best.json", sweep_best_json(result));
}

void run_sweep(const RunConfig& config, std::ostream& log) {
  const auto values = complete_target(config, log);
  const auto result = run_sweep_grid(config, values);
  write_sweep_artifacts(config, result);
  const auto& best = *result.best;
  log << "swept " << result.rows.size() << " cells; best window " << best.window << ", learning rate "
      << best.learning_rate << ", hidden " << best.hidden << "\n";
}

// ---------------------------------------------------------------- forecast

// One value per line, or a CSV whose header names the target column.
std::vector<double> read_recent(const RunConfig& config, const std::string& target) {
  if (config.recent.empty()) throw ConfigError("recent", "no recent-window CSV given");
  std::ifstream in(config.recent);
  if (!in) throw Error(ErrorCode::UnreadableFile, "cannot open " + config.recent.string());
  std::vector<double> values;
  std::string line;
  std::size_t column = 0;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    const auto cleaned = csv::clean_line(line, row == 1);
    if (cleaned.find_first_not_of(" \t") == std::string_view::npos) continue;
    const auto cells = csv::split_line(cleaned);
    if (row == 1 && !csv::parse_number(cells[0])) {
      const auto it = std::find(cells.begin(), cells.end(), target);
      if (it == cells.end()) {
        if (cells.size() != 1) throw RowError(ErrorCode::MalformedHeader, 1, "no column named " + target);
        column = 0;
      } else {
        column = static_cast<std::size_t>(it - cells.begin());
      }
      continue;
    }
    if (column >= cells.size()) throw RowError(ErrorCode::MalformedHeader, row, "missing value column");
    const auto value = csv::parse_number(cells[column]);
    if (!value) throw RowError(ErrorCode::NonFiniteInput, row, "'" + cells[column] + "' is not a number");
    values.push_back(*value);
  }
  return values;
}

void run_forecast(const RunConfig& config, std::ostream& log) {
  const auto model = load_matching_model(config);
  const auto recent = read_recent(config, model.target);
  const double value = forecast(model, recent);
  write_json(config, "forecast.json",
             {{"target", model.target},
              {"window", model.window},
              {"lead_minutes", static_cast<std::int64_t>(model.gap) * ingest::TimeSeries::kStepMinutes},
              {"recent", recent},
              {"forecast", value}});
  log << "forecast " << model.target << " = " << value << "\n";
}

// ---------------------------------------------------------------- entropy

ojson entropy_json(const eval::EntropyReport& e, const std::string& target) {
  return {{"target", target},
          {"bits", e.bits},
          {"max_bits", std::log2(static_cast<double>(e.bin_count))},
          {"bin_count", e.bin_count},
          {"samples", e.n_samples},
          {"min", e.min},
          {"max", e.max}};
}

void run_entropy(const RunConfig& config, std::ostream& log) {
  // Observed values only: imputed draws would add entropy of their own.
  const auto loaded = load_series(config);
  std::vector<double> observed;
  for (const auto& v : loaded.series.values(config.target)) {
    if (v) observed.push_back(*v);
  }
  const auto e = eval::shannon_entropy(observed, config.entropy_bins);
  write_json(config, "entropy.json", entropy_json(e, config.target));
  log << config.target << " entropy " << e.bits << " bits over " << e.bin_count << " bins\n";
}

// ---------------------------------------------------------------- report

void run_report(const RunConfig& config, std::ostream& log) {
  run_ingest(config, log);
  const auto loaded = load_series(config);
  std::vector<double> values;
  if (loaded.series.n_missing(config.target) > 0) {
    run_impute(config, log);
    const auto model = fit_imputer(config, loaded.series);
    values = impute::impute_series(loaded.series, model, config.histogram_bins).series.complete(config.target);
  } else {
    values = loaded.series.complete(config.target);
  }

  ojson observed_only;
  {
    std::vector<double> observed;
    for (const auto& v : loaded.series.values(config.target)) {
      if (v) observed.push_back(*v);
    }
    const auto e = eval::shannon_entropy(observed, config.entropy_bins);
    write_json(config, "entropy.json", entropy_json(e, config.target));
    observed_only = entropy_json(e, config.target);
  }

  train::TrainLog train_log;
  const auto model = train_model(config, values, train_log);
  {
    auto out = open_artifact(config, "train_log.csv");
    train::write_log_csv(out, train_log, config.timing);
  }
  if (train_log.diverged) {
    throw Error(ErrorCode::Diverged, "training diverged at epoch " + std::to_string(train_log.diverged_epoch));
  }
  save_model(config.out / "model.json", model);
  const auto report = evaluate_model(config, model, values);
  write_eval_artifacts(config, model, report);

  ojson doc{{"input", config.input.string()},
            {"target", config.target},
            {"observations", values.size()},
            {"metrics", metrics_json(report, model, config)},
            {"entropy", observed_only}};
  if (config.report_sweep) {
    const auto result = run_sweep_grid(config, values);
    write_sweep_artifacts(config, result);
    doc["sweep_best"] = sweep_best_json(result);
  }
  write_json(config, "report.json", doc);
  log << "report: accuracy " << 100.0 * report.accuracy << "%, MASE " << report.mase_test << "\n";
}

using Handler = void (*)(const RunConfig&, std::ostream&);

const std::map<std::string, Handler>& handlers() {
  static const std::map<std::string, Handler> table{
      {"ingest", run_ingest}, {"impute", run_impute},     {"train", run_train},       {"evaluate", run_evaluate},
      {"sweep", run_sweep},   {"forecast", run_forecast}, {"entropy", run_entropy}, {"report", run_report}};
  return table;
}

}  // namespace

const std::vector<std::string>& commands() {
  static const std::vector<std::string> names{"ingest",   "impute",  "train",  "evaluate",
                                              "sweep",    "forecast", "entropy", "report"};
  return names;
}

void dispatch(const std::string& command, const RunConfig& config, std::ostream& out) {
  const auto it = handlers().find(command);
  if (it == handlers().end()) throw Error(ErrorCode::UnknownCommand, "unknown command '" + command + "'");
  config.validate();
  prepare_output(config);
  it->second(config, out);
}

}  // namespace noxcast::cli
