#include "noxcast_cli/run_config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "noxcast/csv.hpp"
#include "noxcast/error.hpp"

namespace noxcast::cli {

namespace {

using json = nlohmann::json;

template <typename T>
T get_as(const json& value, const std::string& field) {
  try {
    return value.get<T>();
  } catch (const json::exception&) {
    throw ConfigError(field, "has the wrong type");
  }
}

std::size_t get_size(const json& value, const std::string& field) {
  if (!value.is_number_integer() || value.get<long long>() < 0) {
    throw ConfigError(field, "must be a nonnegative integer");
  }
  return value.get<std::size_t>();
}

double get_real(const json& value, const std::string& field) {
  if (!value.is_number()) throw ConfigError(field, "must be a number");
  return value.get<double>();
}

std::vector<std::size_t> get_size_list(const json& value, const std::string& field) {
  if (value.is_string()) return parse_size_list(value.get<std::string>(), field);
  if (!value.is_array()) throw ConfigError(field, "must be an array or a range string like \"2..9\"");
  std::vector<std::size_t> out;
  for (const auto& item : value) out.push_back(get_size(item, field));
  return out;
}

std::vector<double> get_real_list(const json& value, const std::string& field) {
  if (value.is_string()) return parse_real_list(value.get<std::string>(), field);
  if (!value.is_array()) throw ConfigError(field, "must be an array of numbers");
  std::vector<double> out;
  for (const auto& item : value) out.push_back(get_real(item, field));
  return out;
}

void apply_columns(ingest::ColumnMap& columns, const json& value) {
  if (!value.is_object()) throw ConfigError("columns", "must be an object");
  const std::map<std::string, std::string*> slots{{"area", &columns.area},
                                                  {"time", &columns.time},
                                                  {"tsp", &columns.tsp},
                                                  {"sox", &columns.sox},
                                                  {"nox", &columns.nox}};
  for (const auto& [key, item] : value.items()) {
    const auto it = slots.find(key);
    if (it == slots.end()) throw ConfigError("columns." + key, "unknown key");
    *it->second = get_as<std::string>(item, "columns." + key);
  }
}

using Setter = std::function<void(RunConfig&, const json&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table{
      {"input", [](RunConfig& c, const json& v) { c.input = get_as<std::string>(v, "input"); }},
      {"columns", [](RunConfig& c, const json& v) { apply_columns(c.columns, v); }},
      {"target", [](RunConfig& c, const json& v) { c.target = get_as<std::string>(v, "target"); }},
      {"predictors",
       [](RunConfig& c, const json& v) {
         c.predictors = v.is_string() ? parse_name_list(v.get<std::string>())
                                      : get_as<std::vector<std::string>>(v, "predictors");
       }},
      {"window", [](RunConfig& c, const json& v) { c.window = get_size(v, "window"); }},
      {"gap", [](RunConfig& c, const json& v) { c.gap = get_size(v, "gap"); }},
      {"test_fraction", [](RunConfig& c, const json& v) { c.test_fraction = get_real(v, "test_fraction"); }},
      {"hidden", [](RunConfig& c, const json& v) { c.hidden = get_size(v, "hidden"); }},
      {"forget_bias_one",
       [](RunConfig& c, const json& v) { c.forget_bias_one = get_as<bool>(v, "forget_bias_one"); }},
      {"epochs", [](RunConfig& c, const json& v) { c.training.epochs = get_size(v, "epochs"); }},
      {"batch_size", [](RunConfig& c, const json& v) { c.training.batch_size = get_size(v, "batch_size"); }},
      {"learning_rate",
       [](RunConfig& c, const json& v) { c.training.learning_rate = get_real(v, "learning_rate"); }},
      {"beta1", [](RunConfig& c, const json& v) { c.training.beta1 = get_real(v, "beta1"); }},
      {"beta2", [](RunConfig& c, const json& v) { c.training.beta2 = get_real(v, "beta2"); }},
      {"epsilon", [](RunConfig& c, const json& v) { c.training.epsilon = get_real(v, "epsilon"); }},
      {"shuffle", [](RunConfig& c, const json& v) { c.training.shuffle = get_as<bool>(v, "shuffle"); }},
      {"clip_norm", [](RunConfig& c, const json& v) { c.training.clip_norm = get_real(v, "clip_norm"); }},
      {"threads", [](RunConfig& c, const json& v) { c.training.threads = get_size(v, "threads"); }},
      {"seed",
       [](RunConfig& c, const json& v) {
         if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
           throw ConfigError("seed", "must be a nonnegative integer");
         }
         c.seed = v.get<std::uint64_t>();
       }},
      {"entropy_bins", [](RunConfig& c, const json& v) { c.entropy_bins = get_size(v, "entropy_bins"); }},
      {"histogram_bins", [](RunConfig& c, const json& v) { c.histogram_bins = get_size(v, "histogram_bins"); }},
      {"mase_scale", [](RunConfig& c, const json& v) { c.mase_scale = get_as<std::string>(v, "mase_scale"); }},
      {"units", [](RunConfig& c, const json& v) { c.units = get_as<std::string>(v, "units"); }},
      {"windows", [](RunConfig& c, const json& v) { c.windows = get_size_list(v, "windows"); }},
      {"learning_rates", [](RunConfig& c, const json& v) { c.learning_rates = get_real_list(v, "learning_rates"); }},
      {"hidden_sizes", [](RunConfig& c, const json& v) { c.hidden_sizes = get_size_list(v, "hidden_sizes"); }},
      {"workers", [](RunConfig& c, const json& v) { c.workers = get_size(v, "workers"); }},
      {"report_sweep", [](RunConfig& c, const json& v) { c.report_sweep = get_as<bool>(v, "report_sweep"); }},
      {"out", [](RunConfig& c, const json& v) { c.out = get_as<std::string>(v, "out"); }},
      {"model", [](RunConfig& c, const json& v) { c.model = get_as<std::string>(v, "model"); }},
      {"recent", [](RunConfig& c, const json& v) { c.recent = get_as<std::string>(v, "recent"); }},
      {"timing", [](RunConfig& c, const json& v) { c.timing = get_as<bool>(v, "timing"); }},
  };
  return table;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_commas(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream in(text);
  std::string part;
  while (std::getline(in, part, ',')) parts.push_back(trim(part));
  return parts;
}

std::size_t parse_size(const std::string& text, const std::string& field) {
  std::size_t value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
    throw ConfigError(field, "'" + text + "' is not a nonnegative integer");
  }
  return value;
}

}  // namespace

train::TrainConfig RunConfig::train_config() const {
  auto cfg = training;
  cfg.seed = seed;
  return cfg;
}

void RunConfig::validate() const {
  train_config().validate();
  if (window < 2 || window > 64) throw ConfigError("window", "must lie in [2, 64]");
  if (gap < 1) throw ConfigError("gap", "must be at least 1");
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw ConfigError("test_fraction", "must lie in (0, 1)");
  if (hidden == 0) throw ConfigError("hidden", "must be positive");
  if (entropy_bins == 0) throw ConfigError("entropy_bins", "must be positive");
  if (histogram_bins == 0) throw ConfigError("histogram_bins", "must be positive");
  if (mase_scale != "test" && mase_scale != "train") throw ConfigError("mase_scale", "must be \"test\" or \"train\"");
  if (units != "scaled" && units != "original") throw ConfigError("units", "must be \"scaled\" or \"original\"");
  if (workers == 0) throw ConfigError("workers", "must be positive");
  for (const auto w : windows) {
    if (w < 2 || w > 64) throw ConfigError("windows", "every window must lie in [2, 64]");
  }
  for (const double lr : learning_rates) {
    if (!(lr > 0.0) || !std::isfinite(lr)) throw ConfigError("learning_rates", "every rate must be positive");
  }
  for (const auto h : hidden_sizes) {
    if (h == 0) throw ConfigError("hidden_sizes", "every size must be positive");
  }
  if (out.empty()) throw ConfigError("out", "must not be empty");
  const auto is_known = [&](const std::string& name) {
    return name == ingest::kTsp || name == ingest::kSox || name == ingest::kNox;
  };
  if (!is_known(target)) throw ConfigError("target", "must be one of TSP, SOx, NOx");
  for (const auto& p : predictors) {
    if (!is_known(p)) throw ConfigError("predictors", "'" + p + "' is not one of TSP, SOx, NOx");
    if (p == target) throw ConfigError("predictors", "must not include the target");
  }
}

void apply_json(RunConfig& config, const nlohmann::json& doc) {
  if (!doc.is_object()) throw ConfigError("config", "top level must be a JSON object");
  for (const auto& [key, value] : doc.items()) {
    const auto it = setters().find(key);
    if (it == setters().end()) throw ConfigError(key, "unknown key");
    it->second(config, value);
    config.explicit_keys.insert(key);
  }
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config", std::string("invalid JSON: ") + e.what());
  }
  RunConfig config;
  apply_json(config, doc);
  return config;
}

nlohmann::ordered_json to_json(const RunConfig& c) {
  nlohmann::ordered_json j;
  j["input"] = c.input.string();
  j["columns"] = {{"area", c.columns.area},
                  {"time", c.columns.time},
                  {"tsp", c.columns.tsp},
                  {"sox", c.columns.sox},
                  {"nox", c.columns.nox}};
  j["target"] = c.target;
  j["predictors"] = c.predictors;
  j["window"] = c.window;
  j["gap"] = c.gap;
  j["test_fraction"] = c.test_fraction;
  j["hidden"] = c.hidden;
  j["forget_bias_one"] = c.forget_bias_one;
  j["epochs"] = c.training.epochs;
  j["batch_size"] = c.training.batch_size;
  j["learning_rate"] = c.training.learning_rate;
  j["beta1"] = c.training.beta1;
  j["beta2"] = c.training.beta2;
  j["epsilon"] = c.training.epsilon;
  j["shuffle"] = c.training.shuffle;
  j["clip_norm"] = c.training.clip_norm;
  j["threads"] = c.training.threads;
  j["seed"] = c.seed;
  j["entropy_bins"] = c.entropy_bins;
  j["histogram_bins"] = c.histogram_bins;
  j["mase_scale"] = c.mase_scale;
  j["units"] = c.units;
  j["windows"] = c.windows;
  j["learning_rates"] = c.learning_rates;
  j["hidden_sizes"] = c.hidden_sizes;
  j["workers"] = c.workers;
  j["report_sweep"] = c.report_sweep;
  j["out"] = c.out.string();
  j["model"] = c.model.string();
  j["recent"] = c.recent.string();
  j["timing"] = c.timing;
  return j;
}

std::vector<std::size_t> parse_size_list(const std::string& text, const std::string& field) {
  std::vector<std::size_t> out;
  for (const auto& part : split_commas(text)) {
    const auto dots = part.find("..");
    if (dots == std::string::npos) {
      out.push_back(parse_size(part, field));
      continue;
    }
    const auto lo = parse_size(trim(part.substr(0, dots)), field);
    const auto hi = parse_size(trim(part.substr(dots + 2)), field);
    if (lo > hi) throw ConfigError(field, "range '" + part + "' is empty");
    for (auto v = lo; v <= hi; ++v) out.push_back(v);
  }
  if (out.empty()) throw ConfigError(field, "must not be empty");
  return out;
}

std::vector<double> parse_real_list(const std::string& text, const std::string& field) {
  std::vector<double> out;
  for (const auto& part : split_commas(text)) {
    const auto value = csv::parse_number(part);
    if (!value) throw ConfigError(field, "'" + part + "' is not a number");
    out.push_back(*value);
  }
  if (out.empty()) throw ConfigError(field, "must not be empty");
  return out;
}

std::vector<std::string> parse_name_list(const std::string& text) {
  std::vector<std::string> out;
  for (auto& part : split_commas(text)) {
    if (!part.empty()) out.push_back(std::move(part));
  }
  return out;
}

}  // namespace noxcast::cli
