#include <gtest/gtest.h>

#include <cmath>

#include "noxcast/error.hpp"
#include "noxcast/nn.hpp"
#include "noxcast/random.hpp"
#include "support/oracles.hpp"

using namespace noxcast;
using namespace noxcast::nn;

namespace {

LstmParams random_params(std::size_t H, std::uint64_t seed, double scale = 0.5) {
  LstmParams p(H, 1);
  Rng rng(seed);
  for (double& v : p.values()) v = rng.uniform(-scale, scale);
  return p;
}

struct Batch {
  std::vector<std::vector<double>> windows;
  std::vector<double> targets;
  std::vector<SampleRef> refs;
};

Batch random_batch(std::size_t n, std::size_t w, std::uint64_t seed) {
  Batch b;
  Rng rng(seed);
  for (std::size_t k = 0; k < n; ++k) {
    std::vector<double> win(w);
    for (double& x : win) x = rng.uniform(-1.0, 1.0);
    b.windows.push_back(win);
    b.targets.push_back(rng.uniform(-1.0, 1.0));
  }
  for (std::size_t k = 0; k < n; ++k) b.refs.push_back({b.windows[k], b.targets[k]});
  return b;
}

}  // namespace

TEST(LstmParams, LayoutPartitionsTheBuffer) {
  LstmParams p(3, 2);
  EXPECT_EQ(p.size(), 4u * 3 * 5 + 4 * 3 + 3 + 1);
  EXPECT_EQ(p.weights(Gate::Output).data() + 15, p.bias(Gate::Forget).data());
  EXPECT_EQ(p.bias(Gate::Output).data() + 3, p.head().data());
  EXPECT_EQ(p.head().data() + 3, &p.head_bias());
}

TEST(LstmParams, InitIsSeededAndBounded) {
  const auto a = init_params(16, 1, 7);
  const auto b = init_params(16, 1, 7);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, init_params(16, 1, 8));
  for (std::size_t g = 0; g < kGateCount; ++g) {
    for (double w : a.weights(static_cast<Gate>(g))) EXPECT_LE(std::abs(w), 0.25);
    for (double x : a.bias(static_cast<Gate>(g))) EXPECT_EQ(x, 0.0);
  }
  const auto fb = init_params(16, 1, 7, true);
  for (double x : fb.bias(Gate::Forget)) EXPECT_EQ(x, 1.0);
}

TEST(Sigmoid, StableForLargeMagnitudes) {
  EXPECT_EQ(sigmoid(0.0), 0.5);
  EXPECT_GT(sigmoid(-800.0), -1e-300);
  EXPECT_TRUE(std::isfinite(sigmoid(-800.0)));
  EXPECT_EQ(sigmoid(800.0), 1.0);
  EXPECT_NEAR(sigmoid(-40.0), std::exp(-40.0), 1e-30);
}

TEST(CellForward, ZeroWeightsAnalyticCase) {
  LstmParams p(1, 1);
  LstmState s{{0.0}, {2.0}};
  const std::vector<double> x{0.3};
  const auto r = cell_forward(p, x, s);
  EXPECT_EQ(r.cache.f[0], 0.5);
  EXPECT_EQ(r.cache.i[0], 0.5);
  EXPECT_EQ(r.cache.o[0], 0.5);
  EXPECT_EQ(r.cache.g[0], 0.0);
  EXPECT_EQ(r.state.c[0], 1.0);
  EXPECT_NEAR(r.state.h[0], 0.5 * std::tanh(1.0), 1e-15);
  EXPECT_NEAR(r.state.h[0], 0.380797, 1e-6);
}

TEST(CellForward, SaturatedForgetGateDropsMemory) {
  LstmParams p(1, 1);
  p.bias(Gate::Forget)[0] = -30.0;
  const std::vector<double> x{0.7};
  const auto r = cell_forward(p, x, LstmState{{0.0}, {2.0}});
  EXPECT_LT(r.cache.f[0], 1e-12);
  EXPECT_NEAR(r.state.c[0], r.cache.i[0] * r.cache.g[0], 1e-9);
  EXPECT_NEAR(r.state.c[0], 0.0, 1e-9);
}

TEST(CellForward, MatchesScalarOracle) {
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const auto p = random_params(3, seed, 1.5);
    Rng rng(seed * 31);
    LstmState s{{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)},
                {rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3)}};
    const std::vector<double> x{rng.uniform(-2, 2)};
    const auto got = cell_forward(p, x, s);
    const auto want = oracle::oracle_cell(oracle::to_oracle(p), x, s.h, s.c);
    for (std::size_t k = 0; k < 3; ++k) {
      EXPECT_NEAR(got.cache.f[k], want.f[k], 1e-12);
      EXPECT_NEAR(got.cache.i[k], want.i[k], 1e-12);
      EXPECT_NEAR(got.cache.g[k], want.g[k], 1e-12);
      EXPECT_NEAR(got.cache.o[k], want.o[k], 1e-12);
      EXPECT_NEAR(got.state.c[k], want.c[k], 1e-12);
      EXPECT_NEAR(got.state.h[k], want.h[k], 1e-12);
    }
  }
}

TEST(CellForward, GatesStayInOpenIntervals) {
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const auto p = random_params(4, seed, 3.0);
    Rng rng(seed);
    LstmState s{std::vector<double>(4), std::vector<double>(4)};
    for (int t = 0; t < 20; ++t) {
      const std::vector<double> x{rng.uniform(-5, 5)};
      auto r = cell_forward(p, x, s);
      for (std::size_t k = 0; k < 4; ++k) {
        EXPECT_GT(r.cache.f[k], 0.0);
        EXPECT_LT(r.cache.f[k], 1.0);
        EXPECT_GT(r.cache.i[k], 0.0);
        EXPECT_LT(r.cache.i[k], 1.0);
        EXPECT_GT(r.cache.o[k], 0.0);
        EXPECT_LT(r.cache.o[k], 1.0);
        EXPECT_GT(r.cache.g[k], -1.0);
        EXPECT_LT(r.cache.g[k], 1.0);
        EXPECT_LT(std::abs(r.state.h[k]), 1.0);
      }
      s = r.state;
    }
  }
}

TEST(CellForward, PerfectMemoryWhenForgetOpenAndInputClosed) {
  auto p = random_params(2, 5);
  for (double& b : p.bias(Gate::Forget)) b = 40.0;
  for (double& b : p.bias(Gate::Input)) b = -40.0;
  LstmState s{{0.0, 0.0}, {0.8, -1.3}};
  Rng rng(3);
  for (int t = 0; t < 10; ++t) {
    const std::vector<double> x{rng.uniform(-1, 1)};
    s = cell_forward(p, x, s).state;
    EXPECT_NEAR(s.c[0], 0.8, 1e-12);
    EXPECT_NEAR(s.c[1], -1.3, 1e-12);
  }
}

TEST(CellForward, RejectsBadShapesAndValues) {
  LstmParams p(2, 1);
  const std::vector<double> x{0.1};
  const std::vector<double> x2{0.1, 0.2};
  EXPECT_THROW(cell_forward(p, x2, LstmState::zeros(2)), Error);
  EXPECT_THROW(cell_forward(p, x, LstmState::zeros(3)), Error);
  const std::vector<double> bad{std::nan("")};
  try {
    cell_forward(p, bad, LstmState::zeros(2));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonFiniteInput);
  }
}

TEST(Forward, DeadHeadReturnsBias) {
  auto p = random_params(4, 9);
  for (double& v : p.head()) v = 0.0;
  p.head_bias() = 0.7;
  const std::vector<double> w{0.1, 0.9, -0.3};
  EXPECT_EQ(forward(p, w).prediction, 0.7);
}

TEST(Forward, SingleStepEqualsOneCellPlusHead) {
  const auto p = random_params(3, 11);
  const std::vector<double> w{0.42};
  const auto cell = cell_forward(p, w, LstmState::zeros(3));
  double y = p.head_bias();
  for (std::size_t k = 0; k < 3; ++k) y += p.head()[k] * cell.state.h[k];
  EXPECT_EQ(forward(p, w).prediction, y);
  EXPECT_EQ(forward(p, w).caches.size(), 1u);
}

TEST(Forward, MatchesOracleAndIsDeterministic) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto p = random_params(3, seed);
    const auto b = random_batch(1, 5, seed + 100);
    const double y = forward(p, b.windows[0]).prediction;
    EXPECT_NEAR(y, oracle::oracle_predict(oracle::to_oracle(p), b.windows[0]), 1e-12);
    EXPECT_EQ(y, forward(p, b.windows[0]).prediction);
    EXPECT_EQ(y, predict(p, b.windows[0]));
  }
}

TEST(LossAndGradients, PerfectFitGivesZero) {
  LstmParams p(3, 1);
  p.head_bias() = 0.25;
  const auto b = random_batch(4, 5, 1);
  std::vector<SampleRef> refs;
  for (const auto& w : b.windows) refs.push_back({w, 0.25});
  const auto lg = loss_and_gradients(p, refs);
  EXPECT_EQ(lg.loss, 0.0);
  for (double g : lg.grads.values()) EXPECT_EQ(g, 0.0);
}

TEST(LossAndGradients, DeadHeadCutsRecurrentGradients) {
  auto p = random_params(4, 2);
  for (double& v : p.head()) v = 0.0;
  p.head_bias() = 0.3;
  const auto b = random_batch(1, 5, 3);
  const auto lg = loss_and_gradients(p, b.refs);
  for (std::size_t g = 0; g < kGateCount; ++g) {
    for (double x : lg.grads.weights(static_cast<Gate>(g))) EXPECT_EQ(x, 0.0);
    for (double x : lg.grads.bias(static_cast<Gate>(g))) EXPECT_EQ(x, 0.0);
  }
  EXPECT_DOUBLE_EQ(lg.grads.head_bias(), 2.0 * (0.3 - b.targets[0]));
  // The read-out weights still see the hidden state.
  double norm = 0.0;
  for (double x : lg.grads.head()) norm += std::abs(x);
  EXPECT_GT(norm, 0.0);
}

TEST(LossAndGradients, MatchesFiniteDifferences) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto p = random_params(4, seed);
    const auto b = random_batch(3, 5, seed + 50);
    const auto lg = loss_and_gradients(p, b.refs);
    EXPECT_NEAR(lg.loss, loss(p, b.refs), 1e-15);
    for (std::size_t k = 0; k < p.size(); ++k) {
      const double analytic = lg.grads.values()[k];
      const double numeric = numeric_gradient(p, b.refs, k, 1e-5);
      const double tol = std::max(1e-7, 1e-4 * std::max(std::abs(analytic), std::abs(numeric)));
      EXPECT_NEAR(analytic, numeric, tol) << "seed " << seed << " coordinate " << k;
    }
  }
}

TEST(LossAndGradients, ShardSumMatchesWholeBatch) {
  const auto p = random_params(5, 8);
  const auto b = random_batch(13, 6, 9);
  const auto whole = loss_and_gradients(p, b.refs, 1);
  const auto split = loss_and_gradients(p, b.refs, 4);
  EXPECT_NEAR(whole.loss, split.loss, 1e-14);
  for (std::size_t k = 0; k < p.size(); ++k) {
    EXPECT_NEAR(whole.grads.values()[k], split.grads.values()[k], 1e-13);
  }
}

TEST(LossAndGradients, Errors) {
  LstmParams p(2, 1);
  EXPECT_THROW(loss_and_gradients(p, {}), Error);
  std::vector<double> a{0.1, 0.2}, c{0.1, 0.2, 0.3};
  std::vector<SampleRef> mixed{{a, 0.0}, {c, 0.0}};
  try {
    loss_and_gradients(p, mixed);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ShapeMismatch);
  }
  p.head_bias() = 1e300;
  std::vector<SampleRef> one{{a, 0.0}};
  try {
    loss_and_gradients(p, one);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonFiniteLoss);
  }
}

TEST(NumericGradient, QuadraticHeadBias) {
  LstmParams p(2, 1);
  p.head_bias() = 0.9;
  std::vector<double> w{0.5, 0.5};
  std::vector<SampleRef> one{{w, 0.2}};
  EXPECT_NEAR(numeric_gradient(p, one, p.size() - 1, 1e-4), 2.0 * (0.9 - 0.2), 1e-9);
  // V = 0 leaves recurrent weights without a path to the loss.
  EXPECT_LT(std::abs(numeric_gradient(p, one, 0, 1e-5)), 1e-9);
  EXPECT_THROW(numeric_gradient(p, one, 0, 0.0), Error);
}
