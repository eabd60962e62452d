#include "noxcast/eval.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "noxcast/csv.hpp"
#include "noxcast/error.hpp"

namespace noxcast::eval {

namespace {

void check_pair(std::span<const double> actual, std::span<const double> predicted) {
  if (actual.size() != predicted.size()) {
    throw Error(ErrorCode::LengthMismatch, "actual has " + std::to_string(actual.size()) + " values, predicted has " +
                                               std::to_string(predicted.size()));
  }
  if (actual.empty()) throw Error(ErrorCode::EmptyInput, "no values to score");
}

double checked_ratio(double mae_value, double scale) {
  if (!(scale > 0.0)) throw Error(ErrorCode::ConstantSeries, "naive forecast error is zero; MASE is undefined");
  return mae_value / scale;
}

}  // namespace

double rmse(std::span<const double> actual, std::span<const double> predicted) {
  check_pair(actual, predicted);
  double sum = 0.0;
  for (std::size_t t = 0; t < actual.size(); ++t) {
    const double e = actual[t] - predicted[t];
    sum += e * e;
  }
  return std::sqrt(sum / static_cast<double>(actual.size()));
}

double mae(std::span<const double> actual, std::span<const double> predicted) {
  check_pair(actual, predicted);
  double sum = 0.0;
  for (std::size_t t = 0; t < actual.size(); ++t) sum += std::abs(actual[t] - predicted[t]);
  return sum / static_cast<double>(actual.size());
}

double naive_scale(std::span<const double> series) {
  if (series.size() < 2) throw Error(ErrorCode::TooShort, "naive scale needs at least two values");
  double sum = 0.0;
  for (std::size_t t = 1; t < series.size(); ++t) sum += std::abs(series[t] - series[t - 1]);
  return sum / static_cast<double>(series.size() - 1);
}

double mase(std::span<const double> actual, std::span<const double> predicted) {
  check_pair(actual, predicted);
  if (actual.size() < 2) throw Error(ErrorCode::TooShort, "MASE needs at least two values");
  return checked_ratio(mae(actual, predicted), naive_scale(actual));
}

double mase(std::span<const double> actual, std::span<const double> predicted, double preceding) {
  check_pair(actual, predicted);
  double sum = std::abs(actual[0] - preceding);
  for (std::size_t t = 1; t < actual.size(); ++t) sum += std::abs(actual[t] - actual[t - 1]);
  return checked_ratio(mae(actual, predicted), sum / static_cast<double>(actual.size()));
}

double mase_scaled(std::span<const double> actual, std::span<const double> predicted, double scale) {
  return checked_ratio(mae(actual, predicted), scale);
}

double r2_accuracy(std::span<const double> actual, std::span<const double> predicted) {
  check_pair(actual, predicted);
  if (actual.size() < 2) throw Error(ErrorCode::TooShort, "R^2 needs at least two values");
  double mean = 0.0;
  for (double y : actual) mean += y;
  mean /= static_cast<double>(actual.size());
  double var = 0.0;
  for (double y : actual) var += (y - mean) * (y - mean);
  var /= static_cast<double>(actual.size());
  if (!(var > 0.0)) throw Error(ErrorCode::ZeroVariance, "actual values have zero variance");
  const double r = rmse(actual, predicted);
  return 1.0 - r * r / var;
}

std::vector<double> naive_forecast(std::span<const double> actual) {
  if (actual.size() < 2) throw Error(ErrorCode::TooShort, "naive forecast needs at least two values");
  return {actual.begin(), actual.end() - 1};
}

double naive_mase(std::span<const double> actual) {
  const auto predicted = naive_forecast(actual);
  return mase_scaled(actual.subspan(1), predicted, naive_scale(actual));
}

EntropyReport shannon_entropy(std::span<const double> values, std::size_t bin_count) {
  if (bin_count < 2) throw Error(ErrorCode::InvalidArgument, "entropy needs at least two bins");
  if (values.empty()) throw Error(ErrorCode::EmptyInput, "no values for entropy");
  for (double v : values) {
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteInput, "entropy input contains a non-finite value");
  }
  EntropyReport report;
  report.bin_count = bin_count;
  report.n_samples = values.size();
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  report.min = *lo;
  report.max = *hi;
  if (!(*hi > *lo)) return report;

  std::vector<std::size_t> counts(bin_count, 0);
  const double width = (*hi - *lo) / static_cast<double>(bin_count);
  for (double v : values) {
    auto b = static_cast<std::size_t>((v - *lo) / width);
    counts[std::min(b, bin_count - 1)]++;
  }
  const double n = static_cast<double>(values.size());
  double bits = 0.0;
  for (auto c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / n;
    bits -= p * std::log2(p);
  }
  report.bits = std::clamp(bits, 0.0, std::log2(static_cast<double>(bin_count)));
  return report;
}

const char* to_string(OverfitVerdict v) noexcept {
  return v == OverfitVerdict::NotOverfit ? "NotOverfit" : "PossiblyOverfit";
}

OverfitVerdict overfit_verdict(double rmse_train, double rmse_test) noexcept {
  return rmse_train >= rmse_test ? OverfitVerdict::NotOverfit : OverfitVerdict::PossiblyOverfit;
}

EvalReport evaluate_predictions(const dataset::WindowedDataset& ds, std::span<const double> predicted,
                                const EvalOptions& options) {
  if (predicted.size() != ds.size()) {
    throw Error(ErrorCode::LengthMismatch, "one prediction per sample is required");
  }
  if (ds.train_count + ds.test_count != ds.size()) {
    throw Error(ErrorCode::ShapeMismatch, "dataset partition counts do not add up");
  }
  if (ds.train_count == 0) throw Error(ErrorCode::TooShort, "training partition is empty");
  if (ds.test_count < 2) throw Error(ErrorCode::TooShort, "test partition needs at least two samples");

  const auto& sc = ds.scaler;
  const bool original = options.units == Units::Original;
  std::vector<double> actual(ds.targets);
  std::vector<double> pred(predicted.begin(), predicted.end());
  if (original) {
    for (double& y : actual) y = sc.inverse_transform(y);
    for (double& y : pred) y = sc.inverse_transform(y);
  }
  const auto n_train = ds.train_count;
  const std::span<const double> a_train(actual.data(), n_train);
  const std::span<const double> p_train(pred.data(), n_train);
  const std::span<const double> a_test(actual.data() + n_train, ds.test_count);
  const std::span<const double> p_test(pred.data() + n_train, ds.test_count);

  EvalReport report;
  report.units = options.units;
  report.n_train = n_train;
  report.n_test = ds.test_count;
  report.rmse_train = rmse(a_train, p_train);
  report.rmse_test = rmse(a_test, p_test);
  report.rmse_gap = report.rmse_train - report.rmse_test;
  report.overfit_verdict = overfit_verdict(report.rmse_train, report.rmse_test);
  report.accuracy = r2_accuracy(a_test, p_test);
  // Targets are consecutive grid points, so the observation preceding the
  // first test target is the last training target.
  if (options.mase_scale == MaseScale::TrainSegment) {
    report.mase_test = mase_scaled(a_test, p_test, naive_scale(a_train));
  } else {
    report.mase_test = mase(a_test, p_test, actual[n_train - 1]);
  }

  report.predictions.reserve(ds.size());
  for (std::size_t k = 0; k < ds.size(); ++k) {
    report.predictions.push_back({ds.target_index(k), sc.inverse_transform(ds.targets[k]),
                                  sc.inverse_transform(predicted[k]), k >= n_train});
  }
  return report;
}

EvalReport evaluate(const nn::LstmParams& model, const dataset::WindowedDataset& ds, const EvalOptions& options) {
  std::vector<double> predicted;
  predicted.reserve(ds.size());
  for (const auto& window : ds.inputs) predicted.push_back(nn::predict(model, window));
  return evaluate_predictions(ds, predicted, options);
}

void write_predictions_csv(std::ostream& out, const EvalReport& report) {
  csv::write_row(out, {"t_index", "actual", "predicted", "partition"});
  for (const auto& p : report.predictions) {
    csv::write_row(out, {std::to_string(p.t_index), csv::format_number(p.actual), csv::format_number(p.predicted),
                         p.test ? "test" : "train"});
  }
}

}  // namespace noxcast::eval
