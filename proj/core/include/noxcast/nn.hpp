#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace noxcast::nn {

enum class Gate : std::size_t { Forget = 0, Input = 1, Candidate = 2, Output = 3 };
inline constexpr std::size_t kGateCount = 4;

/// Weights of a single-layer LSTM with a linear read-out, in one flat buffer
/// so optimizers and gradient code can treat them as a vector.
///
/// Layout of values():
///   W_f, W_i, W_C, W_o   each hidden x (hidden + input_dim), row-major;
///                        column j < hidden multiplies h_prev[j], the rest x
///   b_f, b_i, b_C, b_o   each hidden
///   V                    hidden (read-out weights)
///   b_y                  1      (read-out bias)
class LstmParams {
 public:
  LstmParams() = default;
  LstmParams(std::size_t hidden, std::size_t input_dim);

  std::size_t hidden() const noexcept { return hidden_; }
  std::size_t input_dim() const noexcept { return input_dim_; }
  /// Row length of each gate matrix: hidden + input_dim.
  std::size_t fan_in() const noexcept { return hidden_ + input_dim_; }
  std::size_t size() const noexcept { return values_.size(); }

  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }

  std::span<double> weights(Gate g) noexcept;
  std::span<const double> weights(Gate g) const noexcept;
  std::span<double> bias(Gate g) noexcept;
  std::span<const double> bias(Gate g) const noexcept;
  std::span<double> head() noexcept;
  std::span<const double> head() const noexcept;
  double& head_bias() noexcept { return values_.back(); }
  double head_bias() const noexcept { return values_.back(); }

  /// All four gate matrices stacked: a (4*hidden) x fan_in matrix.
  std::span<const double> stacked_weights() const noexcept {
    return std::span<const double>(values_).first(kGateCount * hidden_ * fan_in());
  }
  std::span<const double> stacked_biases() const noexcept {
    return std::span<const double>(values_).subspan(kGateCount * hidden_ * fan_in(),
                                                    kGateCount * hidden_);
  }

  bool all_finite() const noexcept;
  bool same_shape(const LstmParams& other) const noexcept {
    return hidden_ == other.hidden_ && input_dim_ == other.input_dim_;
  }

  friend bool operator==(const LstmParams&, const LstmParams&) = default;

 private:
  std::size_t hidden_ = 0;
  std::size_t input_dim_ = 0;
  std::vector<double> values_;
};

/// Gate weights ~ U(-1/sqrt(H), 1/sqrt(H)); biases zero, or forget bias 1
/// when requested.
LstmParams init_params(std::size_t hidden, std::size_t input_dim, std::uint64_t seed,
                       bool forget_bias_one = false);

struct LstmState {
  std::vector<double> h;
  std::vector<double> c;

  static LstmState zeros(std::size_t hidden) { return {std::vector<double>(hidden), std::vector<double>(hidden)}; }
};

/// Activations of one time step, kept for the backward pass. g is the
/// candidate cell value.
struct StepCache {
  std::vector<double> x;
  std::vector<double> h_prev;
  std::vector<double> c_prev;
  std::vector<double> f;
  std::vector<double> i;
  std::vector<double> g;
  std::vector<double> o;
  std::vector<double> c;
  std::vector<double> h;
};

struct CellResult {
  LstmState state;
  StepCache cache;
};

double sigmoid(double z) noexcept;

/// One step of the recurrence on z = [h_prev, x]:
///   f = sig(W_f z + b_f)   i = sig(W_i z + b_i)   g = tanh(W_C z + b_C)
///   c = f*c_prev + i*g     o = sig(W_o z + b_o)   h = o*tanh(c)
CellResult cell_forward(const LstmParams& params, std::span<const double> x, const LstmState& state);

struct ForwardResult {
  double prediction = 0.0;
  std::vector<StepCache> caches;
};

/// Runs the window from a zero state. inputs holds window * input_dim values,
/// time-major. prediction = V . h_last + b_y.
ForwardResult forward(const LstmParams& params, std::span<const double> inputs);

/// Prediction only; no caches kept.
double predict(const LstmParams& params, std::span<const double> inputs);

struct SampleRef {
  std::span<const double> inputs;
  double target = 0.0;
};

struct LossGrad {
  double loss = 0.0;
  LstmParams grads;
};

/// Mean squared error over the batch and its exact gradient by
/// backpropagation through time. With threads > 1 the batch is cut into
/// contiguous shards whose gradients are summed in shard order.
LossGrad loss_and_gradients(const LstmParams& params, std::span<const SampleRef> batch,
                            std::size_t threads = 1);

double loss(const LstmParams& params, std::span<const SampleRef> batch);

/// Central difference of loss() along one flat coordinate of values().
double numeric_gradient(const LstmParams& params, std::span<const SampleRef> batch,
                        std::size_t coordinate, double step);

}  // namespace noxcast::nn
