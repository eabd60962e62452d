#pragma once

#include <cstddef>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "noxcast/dataset.hpp"
#include "noxcast/nn.hpp"

namespace noxcast::eval {

double rmse(std::span<const double> actual, std::span<const double> predicted);
double mae(std::span<const double> actual, std::span<const double> predicted);

/// Mean |y_t - y_{t-1}| over t = 2..n: the one-step naive forecast's MAE.
double naive_scale(std::span<const double> series);

/// Model MAE divided by the naive one-step MAE of the same segment, the
/// latter computed from actual alone (n - 1 differences).
double mase(std::span<const double> actual, std::span<const double> predicted);

/// As above, but the naive forecast of actual[0] is `preceding`, so the
/// denominator has n differences and covers exactly the evaluated points.
double mase(std::span<const double> actual, std::span<const double> predicted, double preceding);

/// MAE divided by a caller-supplied naive scale.
double mase_scaled(std::span<const double> actual, std::span<const double> predicted, double scale);

/// 1 - MSE / population variance of actual. Negative for predictors worse
/// than the mean.
double r2_accuracy(std::span<const double> actual, std::span<const double> predicted);

/// predicted[t] = actual[t - 1], t >= 1; length n - 1.
std::vector<double> naive_forecast(std::span<const double> actual);

/// MASE of the naive forecast against actual[1..], scaled by the naive MAE of
/// the whole series. Equal to 1 for every nonconstant series.
double naive_mase(std::span<const double> actual);

struct EntropyReport {
  double bits = 0.0;
  std::size_t bin_count = 0;
  std::size_t n_samples = 0;
  double min = 0.0;
  double max = 0.0;
};

/// Plug-in Shannon entropy (base 2) of an equal-width histogram over
/// [min, max], last edge inclusive. A constant series gives 0 bits.
EntropyReport shannon_entropy(std::span<const double> values, std::size_t bin_count = 1024);

enum class OverfitVerdict { NotOverfit, PossiblyOverfit };
const char* to_string(OverfitVerdict v) noexcept;

/// NotOverfit iff rmse_train >= rmse_test.
OverfitVerdict overfit_verdict(double rmse_train, double rmse_test) noexcept;

enum class Units { Scaled, Original };
enum class MaseScale { TestSegment, TrainSegment };

struct EvalOptions {
  Units units = Units::Scaled;
  MaseScale mase_scale = MaseScale::TestSegment;
};

struct Prediction {
  std::size_t t_index = 0;
  double actual = 0.0;     // original units
  double predicted = 0.0;  // original units
  bool test = false;
};

struct EvalReport {
  double rmse_train = 0.0;
  double rmse_test = 0.0;
  double mase_test = 0.0;
  double accuracy = 0.0;
  double rmse_gap = 0.0;  // train - test
  OverfitVerdict overfit_verdict = OverfitVerdict::NotOverfit;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  Units units = Units::Scaled;
  std::vector<Prediction> predictions;
};

/// Metrics from precomputed predictions (scaled space), one per sample of ds.
EvalReport evaluate_predictions(const dataset::WindowedDataset& ds, std::span<const double> predicted,
                                const EvalOptions& options = {});

/// Runs the model over every sample of ds and scores it. Test metrics are on
/// the test partition; the MASE denominator uses the observation preceding
/// each evaluated target.
EvalReport evaluate(const nn::LstmParams& model, const dataset::WindowedDataset& ds,
                    const EvalOptions& options = {});

/// t_index,actual,predicted,partition in original units.
void write_predictions_csv(std::ostream& out, const EvalReport& report);

}  // namespace noxcast::eval
