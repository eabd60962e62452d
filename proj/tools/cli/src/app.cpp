#include "noxcast_cli/app.hpp"

#include <algorithm>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "noxcast/error.hpp"

namespace noxcast::cli {

namespace {

enum class Kind { Text, Scalar };

// Flag spelling -> config key. Text values are taken verbatim (paths, names,
// list syntax); scalar values are read as JSON literals (numbers, booleans).
struct Flag {
  std::string names;
  std::string key;
  Kind kind;
  std::string help;
};

const std::vector<Flag>& flags() {
  static const std::vector<Flag> table{
      {"--input", "input", Kind::Text, "input CSV in the station schema"},
      {"--out", "out", Kind::Text, "output directory"},
      {"--target", "target", Kind::Text, "variable to forecast (TSP, SOx, NOx)"},
      {"--predictors", "predictors", Kind::Text, "comma-separated imputation predictors"},
      {"--window", "window", Kind::Scalar, "input window length"},
      {"--gap", "gap", Kind::Scalar, "forecast lead in grid steps"},
      {"--test-fraction", "test_fraction", Kind::Scalar, "trailing fraction held out for testing"},
      {"--hidden", "hidden", Kind::Scalar, "LSTM hidden size"},
      {"--forget-bias-one", "forget_bias_one", Kind::Scalar, "initialise the forget-gate bias to 1 (true/false)"},
      {"--epochs", "epochs", Kind::Scalar, "training epochs"},
      {"--batch,--batch-size", "batch_size", Kind::Scalar, "mini-batch size"},
      {"--lr,--learning-rate", "learning_rate", Kind::Scalar, "Adam step size"},
      {"--beta1", "beta1", Kind::Scalar, "Adam first-moment decay"},
      {"--beta2", "beta2", Kind::Scalar, "Adam second-moment decay"},
      {"--epsilon", "epsilon", Kind::Scalar, "Adam epsilon"},
      {"--shuffle", "shuffle", Kind::Scalar, "shuffle training samples each epoch (true/false)"},
      {"--clip-norm", "clip_norm", Kind::Scalar, "global gradient-norm clip"},
      {"--threads", "threads", Kind::Scalar, "gradient threads within one training run"},
      {"--seed", "seed", Kind::Scalar, "seed for imputation, initialisation and shuffling"},
      {"--bins,--entropy-bins", "entropy_bins", Kind::Scalar, "histogram bins for the entropy estimate"},
      {"--histogram-bins", "histogram_bins", Kind::Scalar, "bins for the imputation histograms"},
      {"--mase-scale", "mase_scale", Kind::Text, "MASE denominator segment (test/train)"},
      {"--units", "units", Kind::Text, "metric units in metrics.json (scaled/original)"},
      {"--windows", "windows", Kind::Text, "sweep windows, e.g. 2..9"},
      {"--lrs,--learning-rates", "learning_rates", Kind::Text, "sweep learning rates, comma-separated"},
      {"--hidden-sizes", "hidden_sizes", Kind::Text, "sweep hidden sizes"},
      {"--workers", "workers", Kind::Scalar, "parallel sweep cells"},
      {"--report-sweep", "report_sweep", Kind::Scalar, "include the sweep in `report` (true/false)"},
      {"--model", "model", Kind::Text, "model JSON (default <out>/model.json)"},
      {"--recent", "recent", Kind::Text, "CSV of the most recent window for `forecast`"},
      {"--timing", "timing", Kind::Scalar, "record wall-clock seconds in logs (true/false)"},
      {"--col-area", "columns.area", Kind::Text, "station column name"},
      {"--col-time", "columns.time", Kind::Text, "timestamp column name"},
      {"--col-tsp", "columns.tsp", Kind::Text, "TSP column name"},
      {"--col-sox", "columns.sox", Kind::Text, "SOx column name"},
      {"--col-nox", "columns.nox", Kind::Text, "NOx column name"},
  };
  return table;
}

nlohmann::json flag_value(const Flag& flag, const std::string& text) {
  if (flag.kind == Kind::Text) return text;
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error&) {
    throw ConfigError(flag.key, "'" + text + "' is not a valid value");
  }
}

void apply_flag(RunConfig& config, const Flag& flag, const std::string& text) {
  const auto dot = flag.key.find('.');
  if (dot == std::string::npos) {
    apply_json(config, nlohmann::json{{flag.key, flag_value(flag, text)}});
  } else {
    const auto outer = flag.key.substr(0, dot);
    apply_json(config, nlohmann::json{{outer, {{flag.key.substr(dot + 1), text}}}});
  }
}

std::string_view category_name(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::Config:
      return "config";
    case ErrorCategory::Numeric:
      return "numeric";
    case ErrorCategory::Data:
      break;
  }
  return "data";
}

int exit_status(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::Config:
      return kExitConfig;
    case ErrorCategory::Numeric:
      return kExitNumeric;
    case ErrorCategory::Data:
      break;
  }
  return kExitData;
}

int report_error(std::ostream& err, const std::string& command, const Error& e) {
  nlohmann::ordered_json doc;
  doc["code"] = std::string(to_string(e.code()));
  doc["category"] = std::string(category_name(category(e.code())));
  doc["command"] = command;
  if (const auto* ce = dynamic_cast<const ConfigError*>(&e)) doc["field"] = ce->field();
  if (const auto* re = dynamic_cast<const RowError*>(&e)) doc["row"] = re->row();
  doc["message"] = e.what();
  err << nlohmann::ordered_json{{"error", doc}}.dump() << '\n';
  return exit_status(category(e.code()));
}

std::string usage() {
  std::string text = "usage: noxcast <command> [--config file.json] [flags]\ncommands:";
  for (const auto& c : commands()) text += " " + c;
  return text + "\nrun `noxcast <command> --help` for the flag list\n";
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  if (args.empty() || args[0] == "--help" || args[0] == "-h") {
    (args.empty() ? err : out) << usage();
    return args.empty() ? kExitConfig : kExitOk;
  }
  const std::string command = args[0];
  try {
    if (std::find(commands().begin(), commands().end(), command) == commands().end()) {
      throw Error(ErrorCode::UnknownCommand, "unknown command '" + command + "'");
    }

    CLI::App app("noxcast " + command, "noxcast " + command);
    std::string config_path;
    app.add_option("--config", config_path, "JSON run configuration");
    std::map<std::string, std::string> given;
    for (const auto& flag : flags()) app.add_option(flag.names, given[flag.key], flag.help);

    std::vector<std::string> rest(args.begin() + 1, args.end());
    std::reverse(rest.begin(), rest.end());  // CLI11 consumes from the back
    try {
      app.parse(rest);
    } catch (const CLI::CallForHelp&) {
      out << app.help();
      return kExitOk;
    } catch (const CLI::ParseError& e) {
      throw ConfigError("arguments", e.what());
    }

    RunConfig config = config_path.empty() ? RunConfig{} : load_config(config_path);
    for (const auto& flag : flags()) {
      const auto name = flag.names.substr(0, flag.names.find(','));
      if (app.count(name) > 0) apply_flag(config, flag, given[flag.key]);
    }
    dispatch(command, config, out);
    return kExitOk;
  } catch (const Error& e) {
    return report_error(err, command, e);
  } catch (const std::filesystem::filesystem_error& e) {
    return report_error(err, command, Error(ErrorCode::UnreadableFile, e.what()));
  } catch (const std::exception& e) {
    return report_error(err, command, Error(ErrorCode::InvalidArgument, e.what()));
  }
}

}  // namespace noxcast::cli
