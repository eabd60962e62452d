#include "noxcast/train.hpp"

#include <chrono>
#include <cmath>
#include <numeric>

#include "noxcast/csv.hpp"
#include "noxcast/error.hpp"

namespace noxcast::train {

void TrainConfig::validate() const {
  if (batch_size == 0) throw ConfigError("batch_size", "must be positive");
  // Zero is accepted and freezes the parameters.
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("learning_rate", "must be a finite nonnegative number");
  }
  if (!(beta1 > 0.0 && beta1 < 1.0)) throw ConfigError("beta1", "must lie in (0, 1)");
  if (!(beta2 > 0.0 && beta2 < 1.0)) throw ConfigError("beta2", "must lie in (0, 1)");
  if (!(epsilon > 0.0)) throw ConfigError("epsilon", "must be positive");
  if (!(clip_norm > 0.0)) throw ConfigError("clip_norm", "must be positive");
  if (threads == 0) throw ConfigError("threads", "must be positive");
}

void adam_update(std::span<double> theta, std::span<const double> grad, AdamState& state, const TrainConfig& cfg) {
  if (theta.size() != grad.size() || state.m.size() != theta.size() || state.v.size() != theta.size()) {
    throw Error(ErrorCode::ShapeMismatch, "Adam state, parameters and gradients differ in size");
  }
  ++state.t;
  const double t = static_cast<double>(state.t);
  const double correction1 = 1.0 - std::pow(cfg.beta1, t);
  const double correction2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t k = 0; k < theta.size(); ++k) {
    const double g = grad[k];
    state.m[k] = cfg.beta1 * state.m[k] + (1.0 - cfg.beta1) * g;
    state.v[k] = cfg.beta2 * state.v[k] + (1.0 - cfg.beta2) * g * g;
    const double m_hat = state.m[k] / correction1;
    const double v_hat = state.v[k] / correction2;
    theta[k] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
  }
}

AdamResult adam_step(nn::LstmParams params, const nn::LstmParams& grads, AdamState state, const TrainConfig& cfg) {
  if (!params.same_shape(grads)) throw Error(ErrorCode::ShapeMismatch, "gradient shape differs from parameters");
  adam_update(params.values(), grads.values(), state, cfg);
  return {std::move(params), std::move(state)};
}

double clip_global_norm(nn::LstmParams& grads, double max_norm) {
  double sq = 0.0;
  for (double g : grads.values()) sq += g * g;
  const double norm = std::sqrt(sq);
  if (norm > max_norm) {
    const double scale = max_norm / norm;
    for (double& g : grads.values()) g *= scale;
  }
  return norm;
}

std::vector<std::vector<std::size_t>> epoch_batches(std::size_t count, std::size_t batch_size, bool shuffle,
                                                    Rng* rng) {
  if (batch_size == 0) throw Error(ErrorCode::InvalidArgument, "batch_size must be positive");
  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (shuffle) {
    if (rng == nullptr) throw Error(ErrorCode::InvalidArgument, "shuffling needs a generator");
    rng->shuffle(std::span<std::size_t>(order));
  }
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t begin = 0; begin < count; begin += batch_size) {
    const std::size_t end = std::min(count, begin + batch_size);
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(begin),
                         order.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return batches;
}

TrainResult train(nn::LstmParams model, const dataset::WindowedDataset& ds, const TrainConfig& cfg) {
  cfg.validate();
  if (ds.train_count == 0) throw Error(ErrorCode::SeriesTooShort, "dataset has no training samples");
  if (model.input_dim() != 1) throw Error(ErrorCode::ShapeMismatch, "windowed datasets are univariate");

  std::vector<nn::SampleRef> samples;
  samples.reserve(ds.train_count);
  for (std::size_t k = 0; k < ds.train_count; ++k) samples.push_back({ds.inputs[k], ds.targets[k]});

  TrainResult result{std::move(model), {}};
  auto& params = result.params;
  auto adam = AdamState::zeros(params.size());
  Rng rng(cfg.seed);
  std::vector<nn::SampleRef> batch;
  std::vector<double> last_finite;

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto started = std::chrono::steady_clock::now();
    double weighted_loss = 0.0;
    bool diverged = false;
    for (const auto& indices : epoch_batches(samples.size(), cfg.batch_size, cfg.shuffle, &rng)) {
      batch.clear();
      for (auto k : indices) batch.push_back(samples[k]);
      nn::LossGrad lg;
      try {
        lg = nn::loss_and_gradients(params, batch, cfg.threads);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::NonFiniteLoss) throw;
        diverged = true;
        break;
      }
      if (!lg.grads.all_finite()) {
        diverged = true;
        break;
      }
      weighted_loss += lg.loss * static_cast<double>(batch.size());
      clip_global_norm(lg.grads, cfg.clip_norm);
      last_finite.assign(params.values().begin(), params.values().end());
      adam_update(params.values(), lg.grads.values(), adam, cfg);
      if (!params.all_finite()) {
        std::copy(last_finite.begin(), last_finite.end(), params.values().begin());
        diverged = true;
        break;
      }
    }
    double rmse = 0.0;
    if (!diverged) {
      rmse = std::sqrt(nn::loss(params, samples));
      diverged = !std::isfinite(rmse) || !std::isfinite(weighted_loss);
    }
    if (diverged) {
      result.log.diverged = true;
      result.log.diverged_epoch = epoch;
      break;
    }
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - started;
    result.log.epochs.push_back({epoch, weighted_loss / static_cast<double>(samples.size()), rmse, elapsed.count()});
  }
  return result;
}

void write_log_csv(std::ostream& out, const TrainLog& log, bool with_timing) {
  csv::write_row(out, {"epoch", "loss", "rmse", "seconds"});
  for (const auto& e : log.epochs) {
    csv::write_row(out, {std::to_string(e.epoch), csv::format_number(e.loss), csv::format_number(e.rmse),
                         with_timing ? csv::format_number(e.seconds) : std::string{}});
  }
}

}  // namespace noxcast::train
