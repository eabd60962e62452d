#pragma once

#include <cstddef>
#include <ostream>
#include <span>
#include <vector>

namespace noxcast::dataset {

inline constexpr std::size_t kMinWindow = 2;
inline constexpr std::size_t kMaxWindow = 64;

/// Min-max scaling to [0, 1] over the range it was fitted on. Values outside
/// that range map outside [0, 1]; nothing is clamped.
struct Scaler {
  double min = 0.0;
  double max = 1.0;

  double transform(double x) const noexcept { return (x - min) / (max - min); }
  double inverse_transform(double s) const noexcept { return min + s * (max - min); }
};

/// Half-open [begin, end) index range.
struct IndexRange {
  std::size_t begin = 0;
  std::size_t end = 0;
};

Scaler fit_scaler(std::span<const double> values, IndexRange fit_range);

/// Supervised samples from one scaled series. Sample k reads
/// y[k .. k+window-1] and predicts y[k+window+gap-1].
struct WindowedDataset {
  std::size_t window = 0;
  std::size_t gap = 1;
  std::vector<std::vector<double>> inputs;
  std::vector<double> targets;
  std::size_t train_count = 0;
  std::size_t test_count = 0;
  Scaler scaler;

  std::size_t size() const noexcept { return targets.size(); }
  /// Grid index of sample k's target.
  std::size_t target_index(std::size_t k) const noexcept { return k + window + gap - 1; }
};

/// All samples, in time order, initially counted as training data.
WindowedDataset make_windows(std::span<const double> values, std::size_t window, std::size_t gap,
                             const Scaler& scaler);

/// test_count = floor(test_fraction * n), the rest train; order is kept.
WindowedDataset split_chronological(WindowedDataset ds, double test_fraction);

struct SplitCounts {
  std::size_t train = 0;
  std::size_t test = 0;
};

/// The same floor rule applied to a plain count (observations or samples).
SplitCounts split_counts(std::size_t n, double test_fraction);

/// Windows, chronological split and a scaler fitted only on the observations
/// that training samples touch (inputs and targets).
WindowedDataset build_dataset(std::span<const double> values, std::size_t window, std::size_t gap,
                              double test_fraction);

/// Columns t_index, input_0..input_{w-1}, target, partition.
void write_dataset_csv(std::ostream& out, const WindowedDataset& ds);

}  // namespace noxcast::dataset
