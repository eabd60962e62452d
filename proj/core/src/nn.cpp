#include "noxcast/nn.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <thread>

#include "noxcast/error.hpp"
#include "noxcast/random.hpp"

namespace noxcast::nn {

namespace {

std::size_t gate_block(std::size_t hidden, std::size_t fan_in) { return hidden * fan_in; }

// a[r] = b[r] + W[r, :] . z for the stacked (4H x F) gate matrix.
void gate_preactivations(const LstmParams& p, const double* z, double* a) {
  const std::size_t rows = kGateCount * p.hidden();
  const std::size_t cols = p.fan_in();
  const double* w = p.stacked_weights().data();
  const double* b = p.stacked_biases().data();
  // Four interleaved partial sums break the add-latency chain. The summation
  // order is fixed, so results do not depend on compiler vectorisation.
  const std::size_t body = cols - cols % 4;
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = w + r * cols;
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    for (std::size_t j = 0; j < body; j += 4) {
      s0 += row[j] * z[j];
      s1 += row[j + 1] * z[j + 1];
      s2 += row[j + 2] * z[j + 2];
      s3 += row[j + 3] * z[j + 3];
    }
    for (std::size_t j = body; j < cols; ++j) s0 += row[j] * z[j];
    a[r] = b[r] + ((s0 + s1) + (s2 + s3));
  }
}

void require_finite(std::span<const double> xs, const char* what) {
  for (double x : xs) {
    if (!std::isfinite(x)) throw Error(ErrorCode::NonFiniteInput, std::string(what) + " contains a non-finite value");
  }
}

// Per-sample scratch for the fused forward/backward pass. Step t of a
// window occupies rows [t*H, (t+1)*H) of each activation buffer.
struct Workspace {
  std::size_t H = 0, F = 0, D = 0, steps = 0;
  std::vector<double> z;      // steps x F: [h_prev, x]
  std::vector<double> c_prev; // steps x H
  std::vector<double> f, i, g, o, c, tanh_c;  // steps x H
  std::vector<double> a;      // 4H scratch
  std::vector<double> da;     // 4H
  std::vector<double> dh, dc, dz;

  void reset(std::size_t hidden, std::size_t input_dim, std::size_t window) {
    H = hidden;
    D = input_dim;
    F = hidden + input_dim;
    steps = window;
    z.assign(steps * F, 0.0);
    for (auto* v : {&c_prev, &f, &i, &g, &o, &c, &tanh_c}) v->assign(steps * H, 0.0);
    a.assign(kGateCount * H, 0.0);
    da.assign(kGateCount * H, 0.0);
    dh.assign(H, 0.0);
    dc.assign(H, 0.0);
    dz.assign(F, 0.0);
  }
};

// Forward over one window, keeping activations in ws. Returns V . h_last + b_y.
double forward_ws(const LstmParams& p, std::span<const double> inputs, Workspace& ws) {
  const std::size_t H = ws.H, F = ws.F, D = ws.D;
  const auto head = p.head();
  for (std::size_t t = 0; t < ws.steps; ++t) {
    double* z = &ws.z[t * F];
    double* cp = &ws.c_prev[t * H];
    if (t == 0) {
      std::fill(z, z + H, 0.0);
      std::fill(cp, cp + H, 0.0);
    } else {
      for (std::size_t k = 0; k < H; ++k) {
        z[k] = ws.o[(t - 1) * H + k] * ws.tanh_c[(t - 1) * H + k];
        cp[k] = ws.c[(t - 1) * H + k];
      }
    }
    for (std::size_t d = 0; d < D; ++d) z[H + d] = inputs[t * D + d];
    gate_preactivations(p, z, ws.a.data());
    for (std::size_t k = 0; k < H; ++k) {
      const double fk = sigmoid(ws.a[k]);
      const double ik = sigmoid(ws.a[H + k]);
      const double gk = std::tanh(ws.a[2 * H + k]);
      const double ok = sigmoid(ws.a[3 * H + k]);
      const double ck = fk * cp[k] + ik * gk;
      ws.f[t * H + k] = fk;
      ws.i[t * H + k] = ik;
      ws.g[t * H + k] = gk;
      ws.o[t * H + k] = ok;
      ws.c[t * H + k] = ck;
      ws.tanh_c[t * H + k] = std::tanh(ck);
    }
  }
  const std::size_t last = (ws.steps - 1) * H;
  double y = p.head_bias();
  for (std::size_t k = 0; k < H; ++k) y += head[k] * (ws.o[last + k] * ws.tanh_c[last + k]);
  return y;
}

// Accumulates d(scale * (y - target)^2)/d(theta) into grad, using the
// activations left in ws by forward_ws.
void backward_ws(const LstmParams& p, Workspace& ws, double dy, LstmParams& grad) {
  const std::size_t H = ws.H, F = ws.F;
  const auto head = p.head();
  auto g_head = grad.head();
  const double* w = p.stacked_weights().data();
  double* gw = grad.values().data();
  double* gb = gw + kGateCount * H * F;

  auto& dh = ws.dh;
  auto& dc = ws.dc;
  auto& da = ws.da;
  auto& dz = ws.dz;
  std::fill(dc.begin(), dc.end(), 0.0);
  const std::size_t last = (ws.steps - 1) * H;
  grad.head_bias() += dy;
  for (std::size_t k = 0; k < H; ++k) {
    g_head[k] += dy * (ws.o[last + k] * ws.tanh_c[last + k]);
    dh[k] = dy * head[k];
  }

  for (std::size_t t = ws.steps; t-- > 0;) {
    const std::size_t off = t * H;
    for (std::size_t k = 0; k < H; ++k) {
      const double ok = ws.o[off + k];
      const double th = ws.tanh_c[off + k];
      const double fk = ws.f[off + k];
      const double ik = ws.i[off + k];
      const double gk = ws.g[off + k];
      // h = o * tanh(c): split dh into the output gate and the cell.
      const double d_o = dh[k] * th;
      const double d_c = dc[k] + dh[k] * ok * (1.0 - th * th);
      // c = f * c_prev + i * g
      const double d_f = d_c * ws.c_prev[off + k];
      const double d_i = d_c * gk;
      const double d_g = d_c * ik;
      dc[k] = d_c * fk;
      da[k] = d_f * fk * (1.0 - fk);
      da[H + k] = d_i * ik * (1.0 - ik);
      da[2 * H + k] = d_g * (1.0 - gk * gk);
      da[3 * H + k] = d_o * ok * (1.0 - ok);
    }
    const double* z = &ws.z[t * F];
    std::fill(dz.begin(), dz.end(), 0.0);
    for (std::size_t r = 0; r < kGateCount * H; ++r) {
      const double dar = da[r];
      gb[r] += dar;
      if (dar == 0.0) continue;
      double* grow = gw + r * F;
      const double* wrow = w + r * F;
      for (std::size_t j = 0; j < F; ++j) {
        grow[j] += dar * z[j];
        dz[j] += wrow[j] * dar;
      }
    }
    std::copy(dz.begin(), dz.begin() + static_cast<std::ptrdiff_t>(H), dh.begin());
  }
}

void check_batch(const LstmParams& params, std::span<const SampleRef> batch) {
  if (batch.empty()) throw Error(ErrorCode::EmptyBatch, "batch is empty");
  const std::size_t len = batch.front().inputs.size();
  if (len == 0 || len % params.input_dim() != 0) {
    throw Error(ErrorCode::ShapeMismatch, "sample length is not a positive multiple of input_dim");
  }
  for (const auto& s : batch) {
    if (s.inputs.size() != len) throw Error(ErrorCode::ShapeMismatch, "samples in a batch differ in window length");
    require_finite(s.inputs, "sample input");
    if (!std::isfinite(s.target)) throw Error(ErrorCode::NonFiniteInput, "sample target is not finite");
  }
}

// Sum of squared errors over a shard and its gradient scaled by `scale`.
double shard_pass(const LstmParams& params, std::span<const SampleRef> shard, double scale, LstmParams& grad) {
  Workspace ws;
  ws.reset(params.hidden(), params.input_dim(), shard.front().inputs.size() / params.input_dim());
  double sse = 0.0;
  for (const auto& s : shard) {
    const double y = forward_ws(params, s.inputs, ws);
    const double err = y - s.target;
    sse += err * err;
    backward_ws(params, ws, 2.0 * err * scale, grad);
  }
  return sse;
}

}  // namespace

LstmParams::LstmParams(std::size_t hidden, std::size_t input_dim)
    : hidden_(hidden), input_dim_(input_dim) {
  if (hidden == 0 || input_dim == 0) throw Error(ErrorCode::ShapeMismatch, "hidden and input_dim must be positive");
  values_.assign(kGateCount * hidden * (hidden + input_dim) + kGateCount * hidden + hidden + 1, 0.0);
}

std::span<double> LstmParams::weights(Gate g) noexcept {
  const auto block = gate_block(hidden_, fan_in());
  return std::span<double>(values_).subspan(static_cast<std::size_t>(g) * block, block);
}

std::span<const double> LstmParams::weights(Gate g) const noexcept {
  const auto block = gate_block(hidden_, fan_in());
  return std::span<const double>(values_).subspan(static_cast<std::size_t>(g) * block, block);
}

std::span<double> LstmParams::bias(Gate g) noexcept {
  const auto base = kGateCount * gate_block(hidden_, fan_in());
  return std::span<double>(values_).subspan(base + static_cast<std::size_t>(g) * hidden_, hidden_);
}

std::span<const double> LstmParams::bias(Gate g) const noexcept {
  const auto base = kGateCount * gate_block(hidden_, fan_in());
  return std::span<const double>(values_).subspan(base + static_cast<std::size_t>(g) * hidden_, hidden_);
}

std::span<double> LstmParams::head() noexcept {
  return std::span<double>(values_).subspan(values_.size() - 1 - hidden_, hidden_);
}

std::span<const double> LstmParams::head() const noexcept {
  return std::span<const double>(values_).subspan(values_.size() - 1 - hidden_, hidden_);
}

bool LstmParams::all_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

LstmParams init_params(std::size_t hidden, std::size_t input_dim, std::uint64_t seed, bool forget_bias_one) {
  LstmParams p(hidden, input_dim);
  Rng rng(seed);
  const double bound = 1.0 / std::sqrt(static_cast<double>(hidden));
  for (std::size_t g = 0; g < kGateCount; ++g) {
    for (double& w : p.weights(static_cast<Gate>(g))) w = rng.uniform(-bound, bound);
  }
  for (double& w : p.head()) w = rng.uniform(-bound, bound);
  if (forget_bias_one) std::fill(p.bias(Gate::Forget).begin(), p.bias(Gate::Forget).end(), 1.0);
  return p;
}

double sigmoid(double z) noexcept {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

CellResult cell_forward(const LstmParams& params, std::span<const double> x, const LstmState& state) {
  const std::size_t H = params.hidden();
  if (x.size() != params.input_dim() || state.h.size() != H || state.c.size() != H) {
    throw Error(ErrorCode::ShapeMismatch, "cell input or state does not match the parameter shapes");
  }
  require_finite(x, "cell input");
  require_finite(state.h, "hidden state");
  require_finite(state.c, "cell state");

  StepCache cache;
  cache.x.assign(x.begin(), x.end());
  cache.h_prev = state.h;
  cache.c_prev = state.c;
  std::vector<double> z(params.fan_in());
  std::copy(state.h.begin(), state.h.end(), z.begin());
  std::copy(x.begin(), x.end(), z.begin() + static_cast<std::ptrdiff_t>(H));
  std::vector<double> a(kGateCount * H);
  gate_preactivations(params, z.data(), a.data());

  for (auto* v : {&cache.f, &cache.i, &cache.g, &cache.o, &cache.c, &cache.h}) v->resize(H);
  for (std::size_t k = 0; k < H; ++k) {
    cache.f[k] = sigmoid(a[k]);
    cache.i[k] = sigmoid(a[H + k]);
    cache.g[k] = std::tanh(a[2 * H + k]);
    cache.o[k] = sigmoid(a[3 * H + k]);
    cache.c[k] = cache.f[k] * state.c[k] + cache.i[k] * cache.g[k];
    cache.h[k] = cache.o[k] * std::tanh(cache.c[k]);
  }
  LstmState next{cache.h, cache.c};
  return {std::move(next), std::move(cache)};
}

ForwardResult forward(const LstmParams& params, std::span<const double> inputs) {
  const std::size_t D = params.input_dim();
  if (inputs.empty() || inputs.size() % D != 0) {
    throw Error(ErrorCode::ShapeMismatch, "window length is not a positive multiple of input_dim");
  }
  ForwardResult out;
  auto state = LstmState::zeros(params.hidden());
  for (std::size_t t = 0; t < inputs.size() / D; ++t) {
    auto step = cell_forward(params, inputs.subspan(t * D, D), state);
    state = std::move(step.state);
    out.caches.push_back(std::move(step.cache));
  }
  const auto head = params.head();
  out.prediction = params.head_bias();
  for (std::size_t k = 0; k < params.hidden(); ++k) out.prediction += head[k] * state.h[k];
  return out;
}

double predict(const LstmParams& params, std::span<const double> inputs) {
  const std::size_t D = params.input_dim();
  if (inputs.empty() || inputs.size() % D != 0) {
    throw Error(ErrorCode::ShapeMismatch, "window length is not a positive multiple of input_dim");
  }
  require_finite(inputs, "window");
  Workspace ws;
  ws.reset(params.hidden(), D, inputs.size() / D);
  return forward_ws(params, inputs, ws);
}

LossGrad loss_and_gradients(const LstmParams& params, std::span<const SampleRef> batch, std::size_t threads) {
  check_batch(params, batch);
  const double scale = 1.0 / static_cast<double>(batch.size());
  const std::size_t shards = std::clamp<std::size_t>(threads, 1, batch.size());

  LossGrad out{0.0, LstmParams(params.hidden(), params.input_dim())};
  double sse = 0.0;
  if (shards == 1) {
    sse = shard_pass(params, batch, scale, out.grads);
  } else {
    std::vector<LstmParams> grads(shards, LstmParams(params.hidden(), params.input_dim()));
    std::vector<double> sums(shards, 0.0);
    {
      std::vector<std::jthread> pool;
      const std::size_t per = batch.size() / shards;
      const std::size_t extra = batch.size() % shards;
      std::size_t begin = 0;
      for (std::size_t s = 0; s < shards; ++s) {
        const std::size_t len = per + (s < extra ? 1 : 0);
        const auto shard = batch.subspan(begin, len);
        begin += len;
        pool.emplace_back([&, s, shard] { sums[s] = shard_pass(params, shard, scale, grads[s]); });
      }
    }
    auto total = out.grads.values();
    for (std::size_t s = 0; s < shards; ++s) {
      sse += sums[s];
      const auto part = grads[s].values();
      for (std::size_t k = 0; k < total.size(); ++k) total[k] += part[k];
    }
  }
  out.loss = sse * scale;
  if (!std::isfinite(out.loss)) throw Error(ErrorCode::NonFiniteLoss, "loss is not finite");
  return out;
}

double loss(const LstmParams& params, std::span<const SampleRef> batch) {
  check_batch(params, batch);
  Workspace ws;
  ws.reset(params.hidden(), params.input_dim(), batch.front().inputs.size() / params.input_dim());
  double sse = 0.0;
  for (const auto& s : batch) {
    const double err = forward_ws(params, s.inputs, ws) - s.target;
    sse += err * err;
  }
  return sse / static_cast<double>(batch.size());
}

double numeric_gradient(const LstmParams& params, std::span<const SampleRef> batch, std::size_t coordinate,
                        double step) {
  if (!(step > 0.0)) throw Error(ErrorCode::InvalidArgument, "finite-difference step must be positive");
  if (coordinate >= params.size()) throw Error(ErrorCode::ShapeMismatch, "coordinate out of range");
  LstmParams probe = params;
  const double base = params.values()[coordinate];
  probe.values()[coordinate] = base + step;
  const double up = loss(probe, batch);
  probe.values()[coordinate] = base - step;
  const double down = loss(probe, batch);
  return (up - down) / (2.0 * step);
}

}  // namespace noxcast::nn
