// Acceptance suite: one PASS/FAIL line per criterion. Exit status is nonzero
// if any criterion fails. Pass criterion numbers as arguments to run a subset.

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "noxcast/dataset.hpp"
#include "noxcast/eval.hpp"
#include "noxcast/impute.hpp"
#include "noxcast/ingest.hpp"
#include "noxcast/nn.hpp"
#include "noxcast/random.hpp"
#include "noxcast/sweep.hpp"
#include "noxcast/train.hpp"
#include "noxcast_cli/app.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace noxcast;

namespace {

namespace fs = std::filesystem;

const fs::path kData = NOXCAST_DATA_DIR;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  // Records a failed check; the first few messages are kept for the report.
  void check(bool ok, const std::string& what) {
    if (ok) return;
    if (pass || detail.str().size() < 400) detail << " [" << what << "]";
    pass = false;
  }
};

struct Criterion {
  int id;
  std::string title;
  double time_limit;  // seconds; 0 = none
  std::function<void(Outcome&)> body;
};

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

// ---------------------------------------------------------------- 1

void gradient_correctness(Outcome& out) {
  std::size_t checked = 0;
  double worst_abs = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    nn::LstmParams p(4, 1);
    Rng rng(seed);
    for (double& v : p.values()) v = rng.uniform(-0.5, 0.5);
    std::vector<std::vector<double>> windows(3, std::vector<double>(5));
    std::vector<double> targets(3);
    for (std::size_t k = 0; k < 3; ++k) {
      for (double& x : windows[k]) x = rng.uniform(-1.0, 1.0);
      targets[k] = rng.uniform(-1.0, 1.0);
    }
    std::vector<nn::SampleRef> batch;
    for (std::size_t k = 0; k < 3; ++k) batch.push_back({windows[k], targets[k]});

    const auto lg = nn::loss_and_gradients(p, batch);
    for (std::size_t k = 0; k < p.size(); ++k) {
      const double analytic = lg.grads.values()[k];
      const double numeric = nn::numeric_gradient(p, batch, k, 1e-5);
      const double diff = std::abs(analytic - numeric);
      const double scale = std::max(std::abs(analytic), std::abs(numeric));
      const bool ok = diff <= 1e-7 || diff <= 1e-4 * scale;
      worst_abs = std::max(worst_abs, diff);
      out.check(ok, "seed " + std::to_string(seed) + " coord " + std::to_string(k) + ": " + fmt(analytic) +
                        " vs " + fmt(numeric));
      ++checked;
    }
  }
  out.detail << checked << " coordinates over 5 configurations, largest |analytic - numeric| " << fmt(worst_abs);
}

// ---------------------------------------------------------------- 2

void cell_fidelity(Outcome& out) {
  double worst = 0.0;
  Rng rng(2024);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t H = 1 + rng.below(8);
    const std::size_t D = 1 + rng.below(3);
    nn::LstmParams p(H, D);
    for (double& v : p.values()) v = rng.uniform(-1.5, 1.5);
    std::vector<double> x(D), h(H), c(H);
    for (double& v : x) v = rng.uniform(-2.0, 2.0);
    for (double& v : h) v = rng.uniform(-1.0, 1.0);
    for (double& v : c) v = rng.uniform(-3.0, 3.0);

    const auto got = nn::cell_forward(p, x, nn::LstmState{h, c});
    const auto want = oracle::oracle_cell(oracle::to_oracle(p), x, h, c);
    const auto compare = [&](const std::vector<double>& a, const std::vector<double>& b) {
      for (std::size_t r = 0; r < H; ++r) worst = std::max(worst, std::abs(a[r] - b[r]));
    };
    compare(got.cache.f, want.f);
    compare(got.cache.i, want.i);
    compare(got.cache.g, want.g);
    compare(got.cache.o, want.o);
    compare(got.state.c, want.c);
    compare(got.state.h, want.h);
  }
  out.check(worst <= 1e-12, "max deviation " + fmt(worst));

  nn::LstmParams zero(1, 1);
  const std::vector<double> x{0.7};
  const auto z = nn::cell_forward(zero, x, nn::LstmState{{0.0}, {2.0}});
  const double expected = 0.5 * std::tanh(1.0);
  out.check(std::abs(z.state.h[0] - expected) <= 1e-12, "zero-weights h = " + fmt(z.state.h[0]));
  out.check(z.state.c[0] == 1.0, "zero-weights c = " + fmt(z.state.c[0]));
  out.detail << "100 random cells, max deviation " << worst << "; zero-weights h = " << fmt(z.state.h[0]);
}

// ---------------------------------------------------------------- 3

void metric_oracles(Outcome& out) {
  Rng rng(31);
  double worst_naive = 0.0, worst_identity = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> a(20 + rng.below(200));
    for (double& v : a) v = rng.normal(5.0, 2.0);
    worst_naive = std::max(worst_naive, std::abs(eval::naive_mase(a) - 1.0));
    const std::span<const double> s(a);
    const double held_out = eval::mase(s.subspan(1), s.first(a.size() - 1), a[0]);
    worst_naive = std::max(worst_naive, std::abs(held_out - 1.0));

    std::vector<double> p(a.size());
    for (std::size_t k = 0; k < a.size(); ++k) p[k] = a[k] + rng.normal(0.0, 1.0);
    const double r = eval::rmse(a, p);
    const double identity = 1.0 - r * r / oracle::population_variance(a);
    worst_identity = std::max(worst_identity, std::abs(eval::r2_accuracy(a, p) - identity));

    out.check(std::abs(eval::r2_accuracy(a, a) - 1.0) <= 1e-12, "perfect R2");
    double mean = 0.0;
    for (double v : a) mean += v;
    mean /= static_cast<double>(a.size());
    const std::vector<double> flat(a.size(), mean);
    out.check(std::abs(eval::r2_accuracy(a, flat)) <= 1e-12, "mean-predictor R2 = " + fmt(eval::r2_accuracy(a, flat)));
  }
  out.check(worst_naive <= 1e-9, "naive MASE off by " + fmt(worst_naive));
  out.check(worst_identity <= 1e-12, "R2 identity off by " + fmt(worst_identity));

  const std::vector<double> a1{1, 2, 3}, p1{2, 2, 2};
  out.check(eval::rmse(a1, p1) == std::sqrt(2.0 / 3.0), "rmse sqrt(2/3) = " + fmt(eval::rmse(a1, p1)));
  const std::vector<double> a2{1, 3, 2, 5}, p2{1, 2, 2, 4};
  out.check(eval::mase(a2, p2) == 0.25, "mase 0.25 case = " + fmt(eval::mase(a2, p2)));
  out.detail << "naive MASE max |err| " << worst_naive << ", R2 identity max |err| " << worst_identity;
}

// ---------------------------------------------------------------- 4

void split_reproduction(Outcome& out) {
  const auto s = dataset::split_counts(41924, 0.3);
  out.check(s.train == 29347 && s.test == 12577, "got " + std::to_string(s.train) + "/" + std::to_string(s.test));
  out.detail << "41924 -> train " << s.train << " / test " << s.test;
}

// ---------------------------------------------------------------- 5

std::vector<double> packaged_sine() {
  const auto parsed = ingest::parse_csv(kData / "sine_fixture.csv");
  return ingest::regularize(parsed.records).complete("NOx");
}

void end_to_end(Outcome& out) {
  const auto values = packaged_sine();
  out.check(values.size() == 1000, "fixture length " + std::to_string(values.size()));
  const auto ds = dataset::build_dataset(values, 7, 1, 0.3);
  train::TrainConfig cfg;
  cfg.learning_rate = 1e-3;
  cfg.epochs = 200;
  cfg.threads = 1;
  const auto trained = train::train(nn::init_params(16, 1, 0), ds, cfg);
  out.check(!trained.log.diverged, "diverged");
  const auto report = eval::evaluate(trained.params, ds);
  out.check(report.accuracy >= 0.95, "R2 " + fmt(report.accuracy));
  out.check(report.mase_test < 1.0, "MASE " + fmt(report.mase_test));
  out.detail << "test R2 " << fmt(report.accuracy) << ", MASE " << fmt(report.mase_test) << ", RMSE train/test "
             << fmt(report.rmse_train) << "/" << fmt(report.rmse_test);
}

// ---------------------------------------------------------------- 6

void sweep_sanity(Outcome& out) {
  sweep::SweepGrid grid;  // windows 2..9, learning rates 1e-1..1e-6
  grid.hidden_sizes = {8};
  grid.base.epochs = 30;
  grid.base.batch_size = 32;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    grid.base.seed = seed;
    const auto series = oracle::lag3_series(1000, seed);
    const auto result = sweep::run_grid(series, grid);
    if (!result.best) {
      out.check(false, "seed " + std::to_string(seed) + ": every cell diverged");
      continue;
    }
    const auto best = *result.best;
    const auto slice = sweep::window_slice(result.rows, best.learning_rate, best.hidden);
    double acc2 = NAN, acc3 = NAN;
    for (const auto& row : slice) {
      if (row.cell.window == 2) acc2 = row.accuracy;
      if (row.cell.window == 3) acc3 = row.accuracy;
    }
    out.check(best.window >= 3, "seed " + std::to_string(seed) + ": best window " + std::to_string(best.window));
    out.check(acc3 > acc2, "seed " + std::to_string(seed) + ": acc(w3) " + fmt(acc3) + " <= acc(w2) " + fmt(acc2));
    out.detail << " seed " << seed << ": best w=" << best.window << " lr=" << best.learning_rate
               << ", acc(w2)=" << fmt(acc2) << ", acc(w3)=" << fmt(acc3) << ";";
  }
}

// ---------------------------------------------------------------- 7

void imputation_statistics(Outcome& out) {
  double sum_ratio = 0.0, worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto fx = oracle::gaussian_fixture(2000, seed);
    const auto holes = oracle::delete_mcar(fx.complete, "NOx", 0.25, seed + 1000);
    const auto model = impute::fit_ols(holes, "NOx", {"SOx", "TSP"}, seed + 2000);
    const auto a = impute::impute_series(holes, model);
    const auto b = impute::impute_series(holes, model);
    out.check(a.series == b.series, "seed " + std::to_string(seed) + ": rerun differs");

    const auto& before = holes.values("NOx");
    const auto& after = a.series.values("NOx");
    for (std::size_t k = 0; k < before.size(); ++k) {
      if (before[k] && std::bit_cast<std::uint64_t>(*before[k]) != std::bit_cast<std::uint64_t>(*after[k])) {
        out.check(false, "seed " + std::to_string(seed) + ": observed value changed at " + std::to_string(k));
        break;
      }
    }
    const double ratio = oracle::population_variance(a.series.complete("NOx")) / oracle::population_variance(fx.nox);
    worst = std::max(worst, std::abs(ratio - 1.0));
    out.check(std::abs(ratio - 1.0) <= 0.15, "seed " + std::to_string(seed) + ": variance ratio " + fmt(ratio));
    sum_ratio += ratio;
  }
  const double mean_ratio = sum_ratio / 20.0;
  out.check(std::abs(mean_ratio - 1.0) <= 0.05, "mean variance ratio " + fmt(mean_ratio));
  out.detail << "variance ratio worst |r-1| " << fmt(worst) << ", mean over 20 seeds " << fmt(mean_ratio);
}

// ---------------------------------------------------------------- 8

void adam_oracle(Outcome& out) {
  train::TrainConfig cfg;
  cfg.learning_rate = 0.01;
  std::vector<double> theta{1.0};
  auto state = train::AdamState::zeros(1);
  oracle::ScalarAdam ref{0.01};
  double ref_theta = 1.0, worst = 0.0;
  for (int k = 0; k < 500; ++k) {
    const std::vector<double> grad{2.0 * theta[0]};
    train::adam_update(theta, grad, state, cfg);
    ref_theta = ref.step(ref_theta, 2.0 * ref_theta);
    worst = std::max(worst, std::abs(theta[0] - ref_theta));
  }
  out.check(worst <= 1e-15, "max step deviation " + fmt(worst));
  out.check(std::abs(theta[0]) < 1e-2, "|theta| = " + fmt(theta[0]));
  out.detail << "theta after 500 steps " << fmt(theta[0]) << ", max deviation from reference " << worst;
}

// ---------------------------------------------------------------- 9

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

void determinism(Outcome& out) {
  const auto root = fs::temp_directory_path() / "noxcast_acceptance_determinism";
  fs::remove_all(root);
  for (const auto* run : {"a", "b"}) {
    std::ostringstream sink, err;
    const int status = cli::run({"train", "--input", (kData / "sine_fixture.csv").string(), "--out",
                                 (root / run).string(), "--threads", "1", "--seed", "7"},
                                sink, err);
    out.check(status == 0, std::string("run ") + run + " exit " + std::to_string(status) + " " + err.str());
  }
  const auto model_a = slurp(root / "a" / "model.json");
  const auto log_a = slurp(root / "a" / "train_log.csv");
  out.check(!model_a.empty() && model_a == slurp(root / "b" / "model.json"), "model JSON differs");
  out.check(!log_a.empty() && log_a == slurp(root / "b" / "train_log.csv"), "train log differs");
  out.detail << "model.json " << model_a.size() << " bytes, train_log.csv " << log_a.size()
             << " bytes; default config (H=64, 100 epochs)";
  fs::remove_all(root);
}

// ---------------------------------------------------------------- 10

void entropy_estimator(Outcome& out) {
  const std::vector<double> constant(1000, 3.25);
  const auto c = eval::shannon_entropy(constant, 1024);
  out.check(c.bits == 0.0, "constant series " + fmt(c.bits) + " bits");
  Rng rng(10);
  std::vector<double> uniform(1'000'000);
  for (double& v : uniform) v = rng.uniform();
  const auto u = eval::shannon_entropy(uniform, 1024);
  out.check(std::abs(u.bits - 10.0) <= 0.02, "uniform " + fmt(u.bits) + " bits");
  out.detail << "constant " << c.bits << " bits; 1e6 uniform draws " << fmt(u.bits) << " bits";
}

// ---------------------------------------------------------------- 11

void overfit_logic(Outcome& out) {
  Rng rng(11);
  std::size_t cases = 0;
  for (int k = 0; k < 10000; ++k) {
    // Coarse values so that ties occur often.
    const double train = std::round(rng.uniform(0.0, 10.0)) / 10.0;
    const double test = std::round(rng.uniform(0.0, 10.0)) / 10.0;
    const auto verdict = eval::overfit_verdict(train, test);
    out.check((verdict == eval::OverfitVerdict::NotOverfit) == (train >= test),
              "train " + fmt(train) + " test " + fmt(test));
    ++cases;
  }
  out.check(eval::overfit_verdict(0.0731, 0.0499) == eval::OverfitVerdict::NotOverfit, "train above test");
  out.check(eval::overfit_verdict(0.04, 0.05) == eval::OverfitVerdict::PossiblyOverfit, "train below test");
  out.check(eval::overfit_verdict(0.05, 0.05) == eval::OverfitVerdict::NotOverfit, "equal");

  // The verdict carried by a full evaluation report follows the same rule.
  const auto values = packaged_sine();
  const auto ds = dataset::build_dataset(values, 4, 1, 0.3);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto report = eval::evaluate(nn::init_params(3, 1, seed), ds);
    out.check((report.overfit_verdict == eval::OverfitVerdict::NotOverfit) == (report.rmse_train >= report.rmse_test),
              "report verdict for seed " + std::to_string(seed));
    ++cases;
  }
  out.detail << cases << " cases, NotOverfit iff rmse_train >= rmse_test";
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria{
      {1, "gradient correctness", 5.0, gradient_correctness},
      {2, "cell-equation fidelity", 0.0, cell_fidelity},
      {3, "metric oracles", 0.0, metric_oracles},
      {4, "split reproduction", 1.0, split_reproduction},
      {5, "end-to-end learning", 60.0, end_to_end},
      {6, "sweep sanity", 300.0, sweep_sanity},
      {7, "imputation statistics", 0.0, imputation_statistics},
      {8, "Adam oracle", 0.0, adam_oracle},
      {9, "determinism", 0.0, determinism},
      {10, "entropy estimator", 0.0, entropy_estimator},
      {11, "overfit-check logic", 0.0, overfit_logic},
  };
  std::vector<int> selected;
  for (int k = 1; k < argc; ++k) selected.push_back(std::atoi(argv[k]));

  int failures = 0;
  for (const auto& c : criteria) {
    if (!selected.empty() && std::find(selected.begin(), selected.end(), c.id) == selected.end()) continue;
    Outcome outcome;
    const auto start = std::chrono::steady_clock::now();
    try {
      c.body(outcome);
    } catch (const std::exception& e) {
      outcome.check(false, std::string("exception: ") + e.what());
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.time_limit > 0.0) outcome.check(seconds < c.time_limit, "over the " + fmt(c.time_limit) + " s budget");
    failures += outcome.pass ? 0 : 1;
    std::printf("%s criterion %2d  %-24s %8.2f s  %s\n", outcome.pass ? "PASS" : "FAIL", c.id, c.title.c_str(),
                seconds, outcome.detail.str().c_str());
    std::fflush(stdout);
  }
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
