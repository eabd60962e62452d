#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "noxcast/ingest.hpp"

namespace noxcast::impute {

/// OLS fit of one target variable on concurrent predictor variables, plus the
/// residual spread used for the stochastic draw.
struct ImputationModel {
  std::string target;
  std::vector<std::string> predictors;
  std::vector<double> coefficients;  // one per predictor
  double intercept = 0.0;
  double residual_sigma = 0.0;
  std::size_t n_complete = 0;  // rows used in the fit
  std::uint64_t seed = 0;
  bool fitted = false;
};

struct ImputationReport {
  std::size_t n_imputed = 0;
  std::size_t n_regression = 0;  // filled from predictors
  std::size_t n_fallback = 0;    // predictors missing; interpolated
  std::size_t n_clamped = 0;     // negative draws set to 0
  double mean_before = 0.0;      // over observed target values
  double mean_after = 0.0;       // over the completed series
  double var_before = 0.0;       // population variance
  double var_after = 0.0;
  std::vector<double> bin_edges;  // shared by both histograms, size bins + 1
  std::vector<std::size_t> histogram_before;
  std::vector<std::size_t> histogram_after;
};

struct ImputationResult {
  ingest::TimeSeries series;
  ImputationReport report;
};

/// Least squares on rows where the target and every predictor are present.
/// residual_sigma = sqrt(SSR / (n - p - 1)).
ImputationModel fit_ols(const ingest::TimeSeries& series, const std::string& target,
                        const std::vector<std::string>& predictors, std::uint64_t seed = 0);

/// Fills every missing target value:
///   predictors present:  intercept + coefficients . x + N(0, sigma^2)
///   otherwise:           linear interpolation between the nearest observed
///                        neighbours (nearest value at the ends) + N(0, sigma^2)
/// Draws come from Rng(model.seed) in grid order, one per filled slot.
/// Results below zero are clamped to zero. Observed values are untouched.
ImputationResult impute_series(const ingest::TimeSeries& series, const ImputationModel& model,
                               std::size_t histogram_bins = 50);

}  // namespace noxcast::impute
