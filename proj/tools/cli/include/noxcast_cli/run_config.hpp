#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "noxcast/ingest.hpp"
#include "noxcast/train.hpp"

namespace noxcast::cli {

/// Everything a command needs. Loaded from a JSON file (unknown keys are
/// rejected) and then overridden by command-line flags.
struct RunConfig {
  std::filesystem::path input;
  ingest::ColumnMap columns;
  std::string target = "NOx";
  std::vector<std::string> predictors{"SOx", "TSP"};

  std::size_t window = 7;
  std::size_t gap = 1;
  double test_fraction = 0.3;
  std::size_t hidden = 64;
  bool forget_bias_one = false;
  train::TrainConfig training;  // its seed is ignored; `seed` below wins
  std::uint64_t seed = 0;       // imputation draws, weight init and shuffling

  std::size_t entropy_bins = 1024;
  std::size_t histogram_bins = 50;
  std::string mase_scale = "test";  // "test" or "train"
  std::string units = "scaled";     // metric units: "scaled" or "original"

  std::vector<std::size_t> windows{2, 3, 4, 5, 6, 7, 8, 9};
  std::vector<double> learning_rates{1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
  std::vector<std::size_t> hidden_sizes{64};
  std::size_t workers = 1;
  bool report_sweep = false;

  std::filesystem::path out = "out";
  std::filesystem::path model;   // defaults to <out>/model.json
  std::filesystem::path recent;  // forecast input
  bool timing = false;           // wall-clock columns in logs (breaks byte identity)

  /// Keys set by the config file or a flag rather than left at the default.
  std::set<std::string> explicit_keys;

  bool is_explicit(const std::string& key) const { return explicit_keys.contains(key); }
  std::filesystem::path model_path() const { return model.empty() ? out / "model.json" : model; }
  train::TrainConfig train_config() const;

  /// Throws ConfigError naming the first offending field.
  void validate() const;
};

/// Strict: unknown keys and wrongly typed values throw ConfigError.
void apply_json(RunConfig& config, const nlohmann::json& doc);
RunConfig load_config(const std::filesystem::path& path);

/// Every field, in a fixed order.
nlohmann::ordered_json to_json(const RunConfig& config);

/// "2..9" or "2,3,5" (ranges and lists may be mixed: "2..4,7").
std::vector<std::size_t> parse_size_list(const std::string& text, const std::string& field);
std::vector<double> parse_real_list(const std::string& text, const std::string& field);
std::vector<std::string> parse_name_list(const std::string& text);

}  // namespace noxcast::cli
