#pragma once

// Synthetic series with known structure, shared by unit and acceptance tests.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "noxcast/ingest.hpp"
#include "noxcast/random.hpp"

namespace noxcast::oracle {

/// 1 + sin(2 pi t / period): amplitude 1, kept nonnegative.
inline std::vector<double> sine_series(std::size_t n = 1000, double period = 48.0) {
  std::vector<double> y(n);
  for (std::size_t t = 0; t < n; ++t) y[t] = 1.0 + std::sin(2.0 * std::numbers::pi * static_cast<double>(t) / period);
  return y;
}

/// y_t = phi * y_{t-3} + N(0, noise^2), started from zeros with a burn-in.
inline std::vector<double> lag3_series(std::size_t n, std::uint64_t seed, double phi = 0.9, double noise = 0.1) {
  Rng rng(seed);
  const std::size_t burn = 300;
  std::vector<double> y(n + burn, 0.0);
  for (std::size_t t = 3; t < y.size(); ++t) y[t] = phi * y[t - 3] + noise * rng.normal();
  return {y.begin() + burn, y.end()};
}

/// Three-variable grid: SOx ~ N(10, 2^2), TSP ~ N(5, 1), and
/// NOx = 20 + 1.5 (SOx - 10) + N(0, 2^2). Far enough above zero that
/// clamping never triggers.
struct GaussianFixture {
  ingest::TimeSeries complete;
  std::vector<double> nox;
};

inline GaussianFixture gaussian_fixture(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<ingest::Reading> tsp(n), sox(n), nox(n);
  std::vector<double> y(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double s = 10.0 + 2.0 * rng.normal();
    sox[k] = s;
    tsp[k] = 5.0 + rng.normal();
    y[k] = 20.0 + 1.5 * (s - 10.0) + 2.0 * rng.normal();
    nox[k] = y[k];
  }
  ingest::TimeSeries ts("fixture", Timestamp{0}, {"TSP", "SOx", "NOx"}, {tsp, sox, nox});
  return {std::move(ts), std::move(y)};
}

/// Deletes round(fraction * n) target entries chosen uniformly without replacement.
inline ingest::TimeSeries delete_mcar(ingest::TimeSeries series, const std::string& name, double fraction,
                                      std::uint64_t seed) {
  Rng rng(seed);
  auto& col = series.values(name);
  std::vector<std::size_t> idx(col.size());
  for (std::size_t k = 0; k < idx.size(); ++k) idx[k] = k;
  rng.shuffle(std::span<std::size_t>(idx));
  const auto drop = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(col.size())));
  for (std::size_t k = 0; k < drop; ++k) col[idx[k]].reset();
  return series;
}

inline double population_variance(const std::vector<double>& xs) {
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  return var / static_cast<double>(xs.size());
}

}  // namespace noxcast::oracle
