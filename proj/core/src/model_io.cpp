#include "noxcast/model_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "noxcast/error.hpp"

namespace noxcast {

namespace {

using json = nlohmann::ordered_json;

constexpr const char* kGateWeightKeys[] = {"W_f", "W_i", "W_C", "W_o"};
constexpr const char* kGateBiasKeys[] = {"b_f", "b_i", "b_C", "b_o"};

json matrix_rows(std::span<const double> flat, std::size_t rows, std::size_t cols) {
  json out = json::array();
  for (std::size_t r = 0; r < rows; ++r) out.push_back(std::vector<double>(flat.begin() + r * cols, flat.begin() + (r + 1) * cols));
  return out;
}

[[noreturn]] void bad_model(const std::string& what) { throw Error(ErrorCode::SchemaMismatch, "model file: " + what); }

void read_vector(const json& node, std::span<double> dest, const std::string& key) {
  if (!node.is_array() || node.size() != dest.size()) bad_model("'" + key + "' has the wrong length");
  for (std::size_t k = 0; k < dest.size(); ++k) {
    if (!node[k].is_number()) bad_model("'" + key + "' holds a non-number");
    dest[k] = node[k].get<double>();
  }
}

void read_matrix(const json& node, std::span<double> dest, std::size_t rows, std::size_t cols, const std::string& key) {
  if (!node.is_array() || node.size() != rows) bad_model("'" + key + "' has the wrong row count");
  for (std::size_t r = 0; r < rows; ++r) read_vector(node[r], dest.subspan(r * cols, cols), key);
}

const json& field(const json& obj, const char* key) {
  if (!obj.is_object() || !obj.contains(key)) bad_model(std::string("missing '") + key + "'");
  return obj.at(key);
}

}  // namespace

std::string to_json(const ModelArtifact& model) {
  const auto& p = model.params;
  const auto H = p.hidden();
  json weights;
  for (std::size_t g = 0; g < nn::kGateCount; ++g) {
    weights[kGateWeightKeys[g]] = matrix_rows(p.weights(static_cast<nn::Gate>(g)), H, p.fan_in());
  }
  for (std::size_t g = 0; g < nn::kGateCount; ++g) {
    const auto b = p.bias(static_cast<nn::Gate>(g));
    weights[kGateBiasKeys[g]] = std::vector<double>(b.begin(), b.end());
  }
  weights["V"] = std::vector<double>(p.head().begin(), p.head().end());
  weights["b_y"] = p.head_bias();

  const auto& t = model.training;
  json doc;
  doc["schema_version"] = kModelSchemaVersion;
  doc["target"] = model.target;
  doc["hidden"] = H;
  doc["input_dim"] = p.input_dim();
  doc["window"] = model.window;
  doc["gap"] = model.gap;
  doc["scaler"] = {{"min", model.scaler.min}, {"max", model.scaler.max}};
  doc["seed"] = model.seed;
  doc["training"] = {{"epochs", t.epochs},       {"batch_size", t.batch_size}, {"learning_rate", t.learning_rate},
                     {"beta1", t.beta1},         {"beta2", t.beta2},           {"epsilon", t.epsilon},
                     {"clip_norm", t.clip_norm}, {"shuffle", t.shuffle},       {"seed", t.seed}};
  doc["weights"] = std::move(weights);
  return doc.dump(2) + "\n";
}

ModelArtifact model_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    bad_model(std::string("not valid JSON (") + e.what() + ")");
  }
  try {
    if (field(doc, "schema_version").get<int>() != kModelSchemaVersion) bad_model("unsupported schema_version");
    ModelArtifact m;
    const auto H = field(doc, "hidden").get<std::size_t>();
    const auto D = field(doc, "input_dim").get<std::size_t>();
    if (H == 0 || D == 0) bad_model("hidden and input_dim must be positive");
    m.params = nn::LstmParams(H, D);
    m.target = field(doc, "target").get<std::string>();
    m.window = field(doc, "window").get<std::size_t>();
    m.gap = field(doc, "gap").get<std::size_t>();
    const auto& sc = field(doc, "scaler");
    m.scaler = {field(sc, "min").get<double>(), field(sc, "max").get<double>()};
    if (!(m.scaler.max > m.scaler.min)) bad_model("scaler max must exceed min");
    m.seed = field(doc, "seed").get<std::uint64_t>();

    const auto& t = field(doc, "training");
    m.training.epochs = field(t, "epochs").get<std::size_t>();
    m.training.batch_size = field(t, "batch_size").get<std::size_t>();
    m.training.learning_rate = field(t, "learning_rate").get<double>();
    m.training.beta1 = field(t, "beta1").get<double>();
    m.training.beta2 = field(t, "beta2").get<double>();
    m.training.epsilon = field(t, "epsilon").get<double>();
    m.training.clip_norm = field(t, "clip_norm").get<double>();
    m.training.shuffle = field(t, "shuffle").get<bool>();
    m.training.seed = field(t, "seed").get<std::uint64_t>();

    const auto& w = field(doc, "weights");
    for (std::size_t g = 0; g < nn::kGateCount; ++g) {
      read_matrix(field(w, kGateWeightKeys[g]), m.params.weights(static_cast<nn::Gate>(g)), H, m.params.fan_in(),
                  kGateWeightKeys[g]);
      read_vector(field(w, kGateBiasKeys[g]), m.params.bias(static_cast<nn::Gate>(g)), kGateBiasKeys[g]);
    }
    read_vector(field(w, "V"), m.params.head(), "V");
    m.params.head_bias() = field(w, "b_y").get<double>();
    if (!m.params.all_finite()) bad_model("weights must be finite");
    return m;
  } catch (const json::exception& e) {
    bad_model(std::string("unexpected field type (") + e.what() + ")");
  }
}

void save_model(const std::filesystem::path& path, const ModelArtifact& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::UnreadableFile, "cannot write '" + path.string() + "'");
  out << to_json(model);
}

ModelArtifact load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::UnreadableFile, "cannot open '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return model_from_json(buf.str());
}

double forecast(const ModelArtifact& model, std::span<const double> recent_window) {
  if (recent_window.size() != model.window) {
    throw Error(ErrorCode::LengthMismatch, "model expects " + std::to_string(model.window) + " recent values, got " +
                                               std::to_string(recent_window.size()));
  }
  std::vector<double> scaled(recent_window.size());
  for (std::size_t k = 0; k < scaled.size(); ++k) scaled[k] = model.scaler.transform(recent_window[k]);
  return model.scaler.inverse_transform(nn::predict(model.params, scaled));
}

}  // namespace noxcast
