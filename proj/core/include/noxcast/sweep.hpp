#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "noxcast/train.hpp"

namespace noxcast::sweep {

struct SweepGrid {
  std::vector<std::size_t> windows{2, 3, 4, 5, 6, 7, 8, 9};
  std::vector<double> learning_rates{1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
  std::vector<std::size_t> hidden_sizes{64};
  train::TrainConfig base;  // seed here is the base seed for every cell
  std::size_t gap = 1;
  double test_fraction = 0.3;
  bool forget_bias_one = false;
};

struct CellId {
  std::size_t window = 0;
  double learning_rate = 0.0;
  std::size_t hidden = 0;

  friend bool operator==(const CellId&, const CellId&) = default;
};

struct SweepRow {
  CellId cell;
  std::uint64_t seed = 0;
  double accuracy = 0.0;
  double rmse_test = 0.0;
  double rmse_train = 0.0;
  double mase_test = 0.0;
  bool diverged = false;
  double seconds = 0.0;
};

struct SweepResult {
  std::vector<SweepRow> rows;  // sorted by (window, learning_rate, hidden)
  std::optional<CellId> best;  // empty when every cell diverged
};

/// Seed for one cell, independent of evaluation order.
std::uint64_t cell_seed(std::uint64_t base_seed, const CellId& cell) noexcept;

/// Trains and scores one model per grid cell on the complete series. Cells
/// run on up to `workers` threads; rows come back in coordinate order.
SweepResult run_grid(std::span<const double> series, const SweepGrid& grid, std::size_t workers = 1);

/// Highest accuracy among non-diverged rows with finite accuracy. Ties go to
/// the smaller window, then the larger learning rate, then the smaller hidden
/// size. Throws Error{AllDiverged} if no row qualifies.
CellId select_best(std::span<const SweepRow> rows);

/// window,learning_rate,hidden,seed,accuracy,rmse_test,rmse_train,mase_test,diverged,seconds
void write_rows_csv(std::ostream& out, std::span<const SweepRow> rows, bool with_timing);

/// Rows with the given learning rate (and hidden), one per window.
std::vector<SweepRow> window_slice(std::span<const SweepRow> rows, double learning_rate, std::size_t hidden);
/// Rows with the given window (and hidden), one per learning rate.
std::vector<SweepRow> learning_rate_slice(std::span<const SweepRow> rows, std::size_t window,
                                          std::size_t hidden);

}  // namespace noxcast::sweep
