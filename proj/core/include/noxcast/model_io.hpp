#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>

#include "noxcast/dataset.hpp"
#include "noxcast/nn.hpp"
#include "noxcast/train.hpp"

namespace noxcast {

inline constexpr int kModelSchemaVersion = 1;

/// A trained network with everything needed to reuse it on raw readings.
struct ModelArtifact {
  nn::LstmParams params;
  std::size_t window = 0;
  std::size_t gap = 1;
  dataset::Scaler scaler;
  std::string target = "NOx";
  std::uint64_t seed = 0;
  train::TrainConfig training;
};

/// Pretty-printed JSON with insertion-ordered keys; doubles are written in
/// shortest round-trip form so a load gives back identical values.
std::string to_json(const ModelArtifact& model);
ModelArtifact model_from_json(const std::string& text);

void save_model(const std::filesystem::path& path, const ModelArtifact& model);
ModelArtifact load_model(const std::filesystem::path& path);

/// Scales the raw window, runs the network, and maps the output back to
/// original units. recent_window.size() must equal model.window.
double forecast(const ModelArtifact& model, std::span<const double> recent_window);

}  // namespace noxcast
