#pragma once

#include <cstddef>
#include <filesystem>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "noxcast/timestamp.hpp"

namespace noxcast::ingest {

/// Missing-aware reading.
using Reading = std::optional<double>;

/// Canonical variable names used inside a TimeSeries.
inline constexpr std::string_view kTsp = "TSP";
inline constexpr std::string_view kSox = "SOx";
inline constexpr std::string_view kNox = "NOx";

/// Header names of the input columns. Defaults match the station export.
struct ColumnMap {
  std::string area = "area_nm";
  std::string time = "measure_dt";
  std::string tsp = "TSP";
  std::string sox = "SOx";
  std::string nox = "NOx";
};

struct RawRecord {
  std::string area_nm;
  Timestamp measure_dt;
  Reading tsp;
  Reading sox;
  Reading nox;
};

struct ParseResult {
  std::vector<RawRecord> records;
  /// Cells that were neither empty nor a valid nonnegative number. They are
  /// read as missing.
  std::size_t rejected_cells = 0;
};

ParseResult parse_csv(const std::filesystem::path& path, const ColumnMap& columns = {});
ParseResult parse_csv(std::istream& in, const ColumnMap& columns = {});

/// A gap-free 30-minute grid. Column k of every variable belongs to
/// start + k * 30 min.
class TimeSeries {
 public:
  static constexpr std::int64_t kStepMinutes = 30;

  TimeSeries(std::string station, Timestamp start, std::vector<std::string> names,
             std::vector<std::vector<Reading>> columns);

  const std::string& station() const noexcept { return station_; }
  Timestamp start() const noexcept { return start_; }
  Timestamp time_at(std::size_t index) const noexcept {
    return Timestamp{start_.minutes + static_cast<std::int64_t>(index) * kStepMinutes};
  }
  std::size_t length() const noexcept { return length_; }

  const std::vector<std::string>& names() const noexcept { return names_; }
  bool has(std::string_view name) const noexcept;

  /// Throws Error{SchemaMismatch} for unknown names.
  const std::vector<Reading>& values(std::string_view name) const;
  std::vector<Reading>& values(std::string_view name);

  std::size_t n_present(std::string_view name) const;
  std::size_t n_missing(std::string_view name) const { return length_ - n_present(name); }

  /// The variable as plain doubles; throws Error{SchemaMismatch} if any
  /// entry is missing.
  std::vector<double> complete(std::string_view name) const;

  friend bool operator==(const TimeSeries&, const TimeSeries&) = default;

 private:
  std::size_t index_of(std::string_view name) const;

  std::string station_;
  Timestamp start_;
  std::size_t length_ = 0;
  std::vector<std::string> names_;
  std::vector<std::vector<Reading>> columns_;
};

/// Sorts records by time and lays them on the 30-minute grid spanning
/// [min, max]; absent slots become missing in every variable.
TimeSeries regularize(std::vector<RawRecord> records);

/// One record per grid slot; the inverse of regularize.
std::vector<RawRecord> to_records(const TimeSeries& series);

/// Writes the series in the input schema (empty cell = missing), so the
/// output can be read back with parse_csv.
void write_series_csv(std::ostream& out, const TimeSeries& series, const ColumnMap& columns = {});

}  // namespace noxcast::ingest
