#include "noxcast/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "noxcast/csv.hpp"
#include "noxcast/error.hpp"

namespace noxcast::dataset {

Scaler fit_scaler(std::span<const double> values, IndexRange fit_range) {
  if (fit_range.begin >= fit_range.end || fit_range.end > values.size()) {
    throw Error(ErrorCode::InvalidArgument, "scaler fit range is empty or out of bounds");
  }
  const auto slice = values.subspan(fit_range.begin, fit_range.end - fit_range.begin);
  const auto [lo, hi] = std::minmax_element(slice.begin(), slice.end());
  if (!(*hi > *lo)) throw Error(ErrorCode::DegenerateRange, "values in the fit range are all equal");
  return Scaler{*lo, *hi};
}

WindowedDataset make_windows(std::span<const double> values, std::size_t window, std::size_t gap,
                             const Scaler& scaler) {
  if (window < kMinWindow || window > kMaxWindow) {
    throw Error(ErrorCode::InvalidArgument, "window must lie in [2, 64], got " + std::to_string(window));
  }
  if (gap < 1) throw Error(ErrorCode::InvalidArgument, "gap must be at least 1");
  if (!(scaler.max > scaler.min)) throw Error(ErrorCode::DegenerateRange, "scaler max must exceed min");
  if (values.size() < window + gap + 1) {
    throw Error(ErrorCode::SeriesTooShort, "series of length " + std::to_string(values.size()) +
                                               " is too short for window " + std::to_string(window) +
                                               " and gap " + std::to_string(gap));
  }

  std::vector<double> scaled(values.size());
  std::transform(values.begin(), values.end(), scaled.begin(), [&](double x) { return scaler.transform(x); });

  WindowedDataset ds;
  ds.window = window;
  ds.gap = gap;
  ds.scaler = scaler;
  const std::size_t count = values.size() - window - gap + 1;
  ds.inputs.reserve(count);
  ds.targets.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    ds.inputs.emplace_back(scaled.begin() + static_cast<std::ptrdiff_t>(k),
                           scaled.begin() + static_cast<std::ptrdiff_t>(k + window));
    ds.targets.push_back(scaled[k + window + gap - 1]);
  }
  ds.train_count = count;
  ds.test_count = 0;
  return ds;
}

SplitCounts split_counts(std::size_t n, double test_fraction) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "test_fraction must lie strictly between 0 and 1");
  }
  const auto test = static_cast<std::size_t>(std::floor(test_fraction * static_cast<double>(n)));
  return {n - test, test};
}

WindowedDataset split_chronological(WindowedDataset ds, double test_fraction) {
  const auto counts = split_counts(ds.size(), test_fraction);
  ds.train_count = counts.train;
  ds.test_count = counts.test;
  return ds;
}

WindowedDataset build_dataset(std::span<const double> values, std::size_t window, std::size_t gap,
                              double test_fraction) {
  if (values.size() < window + gap + 1) {
    throw Error(ErrorCode::SeriesTooShort, "series of length " + std::to_string(values.size()) +
                                               " is too short for window " + std::to_string(window));
  }
  const auto counts = split_counts(values.size() - window - gap + 1, test_fraction);
  // Observations reachable from the training samples: the last training
  // target sits at train - 1 + window + gap - 1.
  const IndexRange fit_range{0, counts.train + window + gap - 1};
  const auto scaler = fit_scaler(values, fit_range);
  return split_chronological(make_windows(values, window, gap, scaler), test_fraction);
}

void write_dataset_csv(std::ostream& out, const WindowedDataset& ds) {
  std::vector<std::string> header{"t_index"};
  for (std::size_t j = 0; j < ds.window; ++j) header.push_back("input_" + std::to_string(j));
  header.push_back("target");
  header.push_back("partition");
  csv::write_row(out, header);
  for (std::size_t k = 0; k < ds.size(); ++k) {
    std::vector<std::string> row{std::to_string(ds.target_index(k))};
    for (double x : ds.inputs[k]) row.push_back(csv::format_number(x));
    row.push_back(csv::format_number(ds.targets[k]));
    row.push_back(k < ds.train_count ? "train" : "test");
    csv::write_row(out, row);
  }
}

}  // namespace noxcast::dataset
