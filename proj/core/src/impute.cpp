#include "noxcast/impute.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include <Eigen/Dense>

#include "noxcast/error.hpp"
#include "noxcast/random.hpp"

namespace noxcast::impute {

namespace {

// Column pivoted QR treats pivots below this fraction of the largest one as zero.
constexpr double kRankThreshold = 1e-10;

struct Moments {
  double mean = 0.0;
  double var = 0.0;
};

Moments moments(const std::vector<double>& xs) {
  Moments m;
  if (xs.empty()) return m;
  for (double x : xs) m.mean += x;
  m.mean /= static_cast<double>(xs.size());
  for (double x : xs) m.var += (x - m.mean) * (x - m.mean);
  m.var /= static_cast<double>(xs.size());
  return m;
}

std::vector<std::size_t> histogram(const std::vector<double>& xs, const std::vector<double>& edges) {
  const std::size_t bins = edges.size() - 1;
  std::vector<std::size_t> counts(bins, 0);
  const double lo = edges.front();
  const double width = (edges.back() - lo) / static_cast<double>(bins);
  for (double x : xs) {
    auto b = static_cast<std::size_t>(std::max(0.0, std::floor((x - lo) / width)));
    counts[std::min(b, bins - 1)]++;
  }
  return counts;
}

}  // namespace

ImputationModel fit_ols(const ingest::TimeSeries& series, const std::string& target,
                        const std::vector<std::string>& predictors, std::uint64_t seed) {
  const auto& y = series.values(target);
  std::vector<const std::vector<ingest::Reading>*> xs;
  for (const auto& name : predictors) {
    if (name == target) throw Error(ErrorCode::SchemaMismatch, "target '" + target + "' listed as its own predictor");
    xs.push_back(&series.values(name));
  }

  std::vector<std::size_t> rows;
  for (std::size_t k = 0; k < series.length(); ++k) {
    if (!y[k]) continue;
    if (std::all_of(xs.begin(), xs.end(), [k](const auto* col) { return (*col)[k].has_value(); })) rows.push_back(k);
  }
  const std::size_t p = predictors.size();
  if (rows.size() < p + 2) {
    throw Error(ErrorCode::InsufficientCompleteRows,
                "need at least " + std::to_string(p + 2) + " complete rows, found " + std::to_string(rows.size()));
  }

  Eigen::MatrixXd design(rows.size(), p + 1);
  Eigen::VectorXd response(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto k = rows[r];
    design(r, 0) = 1.0;
    for (std::size_t j = 0; j < p; ++j) design(r, j + 1) = *(*xs[j])[k];
    response(r) = *y[k];
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  qr.setThreshold(kRankThreshold);
  if (qr.rank() < static_cast<Eigen::Index>(p + 1)) {
    throw Error(ErrorCode::SingularDesign, "predictors are linearly dependent (or constant); drop one");
  }
  const Eigen::VectorXd beta = qr.solve(response);
  const double ssr = (design * beta - response).squaredNorm();

  ImputationModel model;
  model.target = target;
  model.predictors = predictors;
  model.intercept = beta(0);
  for (std::size_t j = 0; j < p; ++j) model.coefficients.push_back(beta(static_cast<Eigen::Index>(j + 1)));
  model.residual_sigma = std::sqrt(ssr / static_cast<double>(rows.size() - p - 1));
  model.n_complete = rows.size();
  model.seed = seed;
  model.fitted = true;
  return model;
}

ImputationResult impute_series(const ingest::TimeSeries& series, const ImputationModel& model,
                               std::size_t histogram_bins) {
  if (!model.fitted) throw Error(ErrorCode::UnfittedModel, "imputation model has not been fitted");
  if (model.coefficients.size() != model.predictors.size()) {
    throw Error(ErrorCode::SchemaMismatch, "model coefficients and predictors differ in count");
  }
  if (histogram_bins == 0) throw Error(ErrorCode::InvalidArgument, "histogram needs at least one bin");

  const auto& y = series.values(model.target);
  std::vector<const std::vector<ingest::Reading>*> xs;
  for (const auto& name : model.predictors) xs.push_back(&series.values(name));

  const std::size_t n = series.length();
  std::vector<double> observed;
  std::vector<std::optional<std::size_t>> prev_obs(n), next_obs(n);
  {
    std::optional<std::size_t> last;
    for (std::size_t k = 0; k < n; ++k) {
      if (y[k]) {
        observed.push_back(*y[k]);
        last = k;
      }
      prev_obs[k] = last;
    }
    last.reset();
    for (std::size_t k = n; k-- > 0;) {
      if (y[k]) last = k;
      next_obs[k] = last;
    }
  }

  ImputationResult result{series, {}};
  auto& out = result.series.values(model.target);
  auto& report = result.report;
  Rng rng(model.seed);

  for (std::size_t k = 0; k < n; ++k) {
    if (y[k]) continue;
    double base = 0.0;
    const bool complete = std::all_of(xs.begin(), xs.end(), [k](const auto* col) { return (*col)[k].has_value(); });
    if (complete) {
      base = model.intercept;
      for (std::size_t j = 0; j < xs.size(); ++j) base += model.coefficients[j] * *(*xs[j])[k];
      ++report.n_regression;
    } else {
      const auto lo = prev_obs[k];
      const auto hi = next_obs[k];
      if (!lo && !hi) {
        throw Error(ErrorCode::InsufficientCompleteRows,
                    "target '" + model.target + "' has no observed values to interpolate from");
      }
      if (lo && hi) {
        const double frac = static_cast<double>(k - *lo) / static_cast<double>(*hi - *lo);
        base = *y[*lo] + frac * (*y[*hi] - *y[*lo]);
      } else {
        base = *y[lo ? *lo : *hi];
      }
      ++report.n_fallback;
    }
    double value = base + model.residual_sigma * rng.normal();
    if (value < 0.0) {
      value = 0.0;
      ++report.n_clamped;
    }
    out[k] = value;
    ++report.n_imputed;
  }

  std::vector<double> after;
  after.reserve(n);
  for (const auto& r : out) after.push_back(*r);

  const auto before_m = moments(observed);
  const auto after_m = moments(after);
  report.mean_before = before_m.mean;
  report.var_before = before_m.var;
  report.mean_after = after_m.mean;
  report.var_after = after_m.var;

  if (!after.empty()) {
    const auto [lo_it, hi_it] = std::minmax_element(after.begin(), after.end());
    double lo = *lo_it;
    double hi = *hi_it;
    if (hi == lo) hi = lo + 1.0;
    report.bin_edges.resize(histogram_bins + 1);
    for (std::size_t b = 0; b <= histogram_bins; ++b) {
      report.bin_edges[b] = lo + (hi - lo) * static_cast<double>(b) / static_cast<double>(histogram_bins);
    }
    report.bin_edges.back() = hi;
    report.histogram_before = histogram(observed, report.bin_edges);
    report.histogram_after = histogram(after, report.bin_edges);
  }
  return result;
}

}  // namespace noxcast::impute
