#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <ostream>
#include <span>
#include <vector>

#include "noxcast/dataset.hpp"
#include "noxcast/nn.hpp"
#include "noxcast/random.hpp"

namespace noxcast::train {

struct TrainConfig {
  std::size_t epochs = 100;
  std::size_t batch_size = 64;
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t seed = 0;
  bool shuffle = true;
  double clip_norm = 5.0;
  std::size_t threads = 1;

  /// Throws ConfigError naming the first bad field.
  void validate() const;
};

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::uint64_t t = 0;

  static AdamState zeros(std::size_t n) { return {std::vector<double>(n), std::vector<double>(n), 0}; }
};

/// In-place Adam update of theta with bias-corrected moments.
void adam_update(std::span<double> theta, std::span<const double> grad, AdamState& state,
                 const TrainConfig& cfg);

struct AdamResult {
  nn::LstmParams params;
  AdamState state;
};

AdamResult adam_step(nn::LstmParams params, const nn::LstmParams& grads, AdamState state,
                     const TrainConfig& cfg);

/// Rescales grads so their global L2 norm is at most max_norm. Returns the
/// norm before clipping.
double clip_global_norm(nn::LstmParams& grads, double max_norm);

struct EpochLog {
  std::size_t epoch = 0;  // 1-based
  double loss = 0.0;      // sample-weighted mean of batch losses seen during the epoch
  double rmse = 0.0;      // on the full training partition after the epoch
  double seconds = 0.0;
};

struct TrainLog {
  std::vector<EpochLog> epochs;
  bool diverged = false;
  std::size_t diverged_epoch = 0;  // 1-based; 0 when not diverged
};

struct TrainResult {
  nn::LstmParams params;
  TrainLog log;
};

/// Every sample index of [0, count) exactly once, cut into batches of
/// batch_size (last batch may be short), shuffled first if requested.
std::vector<std::vector<std::size_t>> epoch_batches(std::size_t count, std::size_t batch_size,
                                                    bool shuffle, Rng* rng);

/// Mini-batch training on the training partition. On a non-finite loss the
/// epoch is flagged and the last finite params are returned.
TrainResult train(nn::LstmParams model, const dataset::WindowedDataset& ds, const TrainConfig& cfg);

/// epoch,loss,rmse,seconds. Wall time is left blank unless with_timing.
void write_log_csv(std::ostream& out, const TrainLog& log, bool with_timing);

}  // namespace noxcast::train
