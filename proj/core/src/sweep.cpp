#include "noxcast/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <thread>

#include "noxcast/csv.hpp"
#include "noxcast/error.hpp"
#include "noxcast/eval.hpp"
#include "noxcast/random.hpp"

namespace noxcast::sweep {

namespace {

bool same_rate(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(std::abs(a), std::abs(b)); }

// Strict "a ranks above b" for selection.
bool ranks_above(const SweepRow& a, const SweepRow& b) {
  if (a.accuracy != b.accuracy) return a.accuracy > b.accuracy;
  if (a.cell.window != b.cell.window) return a.cell.window < b.cell.window;
  if (a.cell.learning_rate != b.cell.learning_rate) return a.cell.learning_rate > b.cell.learning_rate;
  return a.cell.hidden < b.cell.hidden;
}

template <typename T>
std::vector<T> sorted_unique(std::vector<T> xs) {
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  return xs;
}

}  // namespace

std::uint64_t cell_seed(std::uint64_t base_seed, const CellId& cell) noexcept {
  const std::uint64_t coords[] = {cell.window, std::bit_cast<std::uint64_t>(cell.learning_rate), cell.hidden};
  return derive_seed(base_seed, coords);
}

SweepResult run_grid(std::span<const double> series, const SweepGrid& grid, std::size_t workers) {
  if (grid.windows.empty() || grid.learning_rates.empty() || grid.hidden_sizes.empty()) {
    throw Error(ErrorCode::EmptyGrid, "every grid axis needs at least one value");
  }
  grid.base.validate();
  const auto windows = sorted_unique(grid.windows);
  const auto rates = sorted_unique(grid.learning_rates);
  const auto hiddens = sorted_unique(grid.hidden_sizes);
  for (double lr : rates) {
    if (!(lr >= 0.0) || !std::isfinite(lr)) throw ConfigError("learning_rates", "must be finite and nonnegative");
  }
  for (auto h : hiddens) {
    if (h == 0) throw ConfigError("hidden_sizes", "must be positive");
  }

  // One dataset per window; building them up front also surfaces
  // SeriesTooShort before any training starts.
  std::map<std::size_t, dataset::WindowedDataset> datasets;
  for (auto w : windows) datasets.emplace(w, dataset::build_dataset(series, w, grid.gap, grid.test_fraction));

  std::vector<CellId> cells;
  for (auto w : windows) {
    for (double lr : rates) {
      for (auto h : hiddens) cells.push_back({w, lr, h});
    }
  }

  SweepResult result;
  result.rows.resize(cells.size());
  std::atomic<std::size_t> next{0};
  const auto run_cells = [&] {
    for (std::size_t k = next.fetch_add(1); k < cells.size(); k = next.fetch_add(1)) {
      const auto& cell = cells[k];
      const auto started = std::chrono::steady_clock::now();
      SweepRow row;
      row.cell = cell;
      row.seed = cell_seed(grid.base.seed, cell);
      auto cfg = grid.base;
      cfg.learning_rate = cell.learning_rate;
      cfg.seed = row.seed;
      cfg.threads = 1;
      const auto& ds = datasets.at(cell.window);
      auto trained = train::train(nn::init_params(cell.hidden, 1, row.seed, grid.forget_bias_one), ds, cfg);
      row.diverged = trained.log.diverged;
      const double nan = std::numeric_limits<double>::quiet_NaN();
      row.accuracy = row.rmse_test = row.rmse_train = row.mase_test = nan;
      try {
        const auto report = eval::evaluate(trained.params, ds);
        row.accuracy = report.accuracy;
        row.rmse_test = report.rmse_test;
        row.rmse_train = report.rmse_train;
        row.mase_test = report.mase_test;
      } catch (const Error&) {
        row.diverged = true;
      }
      if (!std::isfinite(row.accuracy)) row.diverged = true;
      const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - started;
      row.seconds = elapsed.count();
      result.rows[k] = row;
    }
  };

  const std::size_t n_workers = std::clamp<std::size_t>(workers, 1, cells.size());
  if (n_workers == 1) {
    run_cells();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(run_cells);
  }

  try {
    result.best = select_best(result.rows);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::AllDiverged) throw;
  }
  return result;
}

CellId select_best(std::span<const SweepRow> rows) {
  const SweepRow* best = nullptr;
  for (const auto& row : rows) {
    if (row.diverged || !std::isfinite(row.accuracy)) continue;
    if (best == nullptr || ranks_above(row, *best)) best = &row;
  }
  if (best == nullptr) throw Error(ErrorCode::AllDiverged, "no grid cell produced a usable model");
  return best->cell;
}

void write_rows_csv(std::ostream& out, std::span<const SweepRow> rows, bool with_timing) {
  csv::write_row(out, {"window", "learning_rate", "hidden", "seed", "accuracy", "rmse_test", "rmse_train",
                       "mase_test", "diverged", "seconds"});
  for (const auto& r : rows) {
    csv::write_row(out, {std::to_string(r.cell.window), csv::format_number(r.cell.learning_rate),
                         std::to_string(r.cell.hidden), std::to_string(r.seed), csv::format_number(r.accuracy),
                         csv::format_number(r.rmse_test), csv::format_number(r.rmse_train),
                         csv::format_number(r.mase_test), r.diverged ? "true" : "false",
                         with_timing ? csv::format_number(r.seconds) : std::string{}});
  }
}

std::vector<SweepRow> window_slice(std::span<const SweepRow> rows, double learning_rate, std::size_t hidden) {
  std::vector<SweepRow> out;
  for (const auto& r : rows) {
    if (same_rate(r.cell.learning_rate, learning_rate) && r.cell.hidden == hidden) out.push_back(r);
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.cell.window < b.cell.window; });
  return out;
}

std::vector<SweepRow> learning_rate_slice(std::span<const SweepRow> rows, std::size_t window, std::size_t hidden) {
  std::vector<SweepRow> out;
  for (const auto& r : rows) {
    if (r.cell.window == window && r.cell.hidden == hidden) out.push_back(r);
  }
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return a.cell.learning_rate < b.cell.learning_rate; });
  return out;
}

}  // namespace noxcast::sweep
