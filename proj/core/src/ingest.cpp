#include "noxcast/ingest.hpp"

#include <algorithm>
#include <fstream>

#include "noxcast/csv.hpp"
#include "noxcast/error.hpp"

namespace noxcast::ingest {

namespace {

std::size_t require_column(const std::vector<std::string>& header, const std::string& name) {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) {
    throw Error(ErrorCode::MalformedHeader, "required column '" + name + "' not found in header");
  }
  return static_cast<std::size_t>(it - header.begin());
}

Reading read_cell(const std::vector<std::string>& cells, std::size_t col, std::size_t& rejected) {
  if (col >= cells.size()) return std::nullopt;
  const auto& text = cells[col];
  if (text.find_first_not_of(" \t") == std::string::npos) return std::nullopt;
  const auto value = csv::parse_number(text);
  if (!value || *value < 0.0) {
    ++rejected;
    return std::nullopt;
  }
  return value;
}

}  // namespace

ParseResult parse_csv(const std::filesystem::path& path, const ColumnMap& columns) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::UnreadableFile, "cannot open '" + path.string() + "'");
  return parse_csv(in, columns);
}

ParseResult parse_csv(std::istream& in, const ColumnMap& columns) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::MalformedHeader, "missing header row");
  auto header = csv::split_line(csv::clean_line(line, true));
  for (auto& name : header) {
    while (!name.empty() && name.back() == ' ') name.pop_back();
    while (!name.empty() && name.front() == ' ') name.erase(name.begin());
  }
  const auto c_area = require_column(header, columns.area);
  const auto c_time = require_column(header, columns.time);
  const auto c_tsp = require_column(header, columns.tsp);
  const auto c_sox = require_column(header, columns.sox);
  const auto c_nox = require_column(header, columns.nox);

  ParseResult result;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    const auto text = csv::clean_line(line, false);
    if (text.find_first_not_of(" \t") == std::string_view::npos) continue;
    const auto cells = csv::split_line(text);
    const std::string stamp = c_time < cells.size() ? cells[c_time] : std::string{};
    const auto ts = parse_timestamp(stamp);
    if (!ts) throw RowError(ErrorCode::BadTimestamp, row, "unparseable timestamp '" + stamp + "'");
    if (const int m = minute_of_hour(*ts); m != 0 && m != 30) {
      throw RowError(ErrorCode::BadTimestamp, row, "timestamp '" + stamp + "' is off the 30-minute grid");
    }
    RawRecord rec;
    rec.area_nm = c_area < cells.size() ? cells[c_area] : std::string{};
    rec.measure_dt = *ts;
    rec.tsp = read_cell(cells, c_tsp, result.rejected_cells);
    rec.sox = read_cell(cells, c_sox, result.rejected_cells);
    rec.nox = read_cell(cells, c_nox, result.rejected_cells);
    result.records.push_back(std::move(rec));
  }
  return result;
}

TimeSeries::TimeSeries(std::string station, Timestamp start, std::vector<std::string> names,
                       std::vector<std::vector<Reading>> columns)
    : station_(std::move(station)), start_(start), names_(std::move(names)), columns_(std::move(columns)) {
  if (names_.size() != columns_.size()) {
    throw Error(ErrorCode::SchemaMismatch, "variable names and columns differ in count");
  }
  length_ = columns_.empty() ? 0 : columns_.front().size();
  for (const auto& col : columns_) {
    if (col.size() != length_) throw Error(ErrorCode::SchemaMismatch, "columns differ in length");
  }
}

bool TimeSeries::has(std::string_view name) const noexcept {
  return std::find(names_.begin(), names_.end(), name) != names_.end();
}

std::size_t TimeSeries::index_of(std::string_view name) const {
  const auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) {
    throw Error(ErrorCode::SchemaMismatch, "series has no variable '" + std::string(name) + "'");
  }
  return static_cast<std::size_t>(it - names_.begin());
}

const std::vector<Reading>& TimeSeries::values(std::string_view name) const {
  return columns_[index_of(name)];
}

std::vector<Reading>& TimeSeries::values(std::string_view name) {
  return columns_[index_of(name)];
}

std::size_t TimeSeries::n_present(std::string_view name) const {
  const auto& col = values(name);
  return static_cast<std::size_t>(std::count_if(col.begin(), col.end(), [](const Reading& r) { return r.has_value(); }));
}

std::vector<double> TimeSeries::complete(std::string_view name) const {
  const auto& col = values(name);
  std::vector<double> out;
  out.reserve(col.size());
  for (std::size_t k = 0; k < col.size(); ++k) {
    if (!col[k]) {
      throw Error(ErrorCode::SchemaMismatch, "variable '" + std::string(name) + "' is missing at " +
                                                 format_timestamp(time_at(k)) + "; impute it first");
    }
    out.push_back(*col[k]);
  }
  return out;
}

TimeSeries regularize(std::vector<RawRecord> records) {
  if (records.empty()) throw Error(ErrorCode::EmptyInput, "no records to regularize");
  std::stable_sort(records.begin(), records.end(),
                   [](const RawRecord& a, const RawRecord& b) { return a.measure_dt < b.measure_dt; });
  for (std::size_t k = 1; k < records.size(); ++k) {
    if (records[k].measure_dt == records[k - 1].measure_dt) {
      throw Error(ErrorCode::DuplicateTimestamp,
                  "timestamp " + format_timestamp(records[k].measure_dt) + " appears more than once");
    }
  }
  if (records.size() < 2) throw Error(ErrorCode::EmptyInput, "need at least two distinct timestamps");

  const auto start = records.front().measure_dt;
  const auto span = records.back().measure_dt.minutes - start.minutes;
  if (span % TimeSeries::kStepMinutes != 0) {
    throw Error(ErrorCode::BadTimestamp, "timestamps are not on a common 30-minute grid");
  }
  const auto length = static_cast<std::size_t>(span / TimeSeries::kStepMinutes) + 1;

  std::vector<Reading> tsp(length), sox(length), nox(length);
  for (const auto& rec : records) {
    const auto offset = rec.measure_dt.minutes - start.minutes;
    if (offset % TimeSeries::kStepMinutes != 0) {
      throw Error(ErrorCode::BadTimestamp,
                  "timestamp " + format_timestamp(rec.measure_dt) + " is off the 30-minute grid");
    }
    const auto k = static_cast<std::size_t>(offset / TimeSeries::kStepMinutes);
    tsp[k] = rec.tsp;
    sox[k] = rec.sox;
    nox[k] = rec.nox;
  }
  return TimeSeries(records.front().area_nm, start, {std::string(kTsp), std::string(kSox), std::string(kNox)},
                    {std::move(tsp), std::move(sox), std::move(nox)});
}

std::vector<RawRecord> to_records(const TimeSeries& series) {
  const auto& tsp = series.values(kTsp);
  const auto& sox = series.values(kSox);
  const auto& nox = series.values(kNox);
  std::vector<RawRecord> out;
  out.reserve(series.length());
  for (std::size_t k = 0; k < series.length(); ++k) {
    out.push_back({series.station(), series.time_at(k), tsp[k], sox[k], nox[k]});
  }
  return out;
}

void write_series_csv(std::ostream& out, const TimeSeries& series, const ColumnMap& columns) {
  csv::write_row(out, {columns.area, columns.time, columns.tsp, columns.sox, columns.nox});
  const auto cell = [](const Reading& r) { return r ? csv::format_number(*r) : std::string{}; };
  for (const auto& rec : to_records(series)) {
    csv::write_row(out, {rec.area_nm, format_timestamp(rec.measure_dt), cell(rec.tsp), cell(rec.sox), cell(rec.nox)});
  }
}

}  // namespace noxcast::ingest
