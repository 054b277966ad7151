// Acceptance suite: one PASS/FAIL line per criterion. Takes the path of the
// kilnloop executable as its only argument.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "kilnloop/campaign.hpp"
#include "kilnloop/dataset.hpp"
#include "kilnloop/error.hpp"
#include "kilnloop/metrics.hpp"
#include "kilnloop/mlp.hpp"
#include "kilnloop/pso.hpp"
#include "kilnloop/surrogate.hpp"
#include "kilnloop/virtual_lab.hpp"

using namespace kilnloop;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

std::string g_cli;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double v, int digits = 4) {
  std::ostringstream os;
  os.precision(digits);
  os << std::fixed << v;
  return os.str();
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("kilnloop_acceptance_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int sh(const std::string& args) {
  const std::string cmd = "\"" + g_cli + "\" " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) files[fs::relative(e.path(), dir).string()] = read_file(e.path().string());
  return files;
}

const Dataset& seed7_history() {
  static const Dataset h = lab::generate_history(lab::OracleConfig{}, 300, 7);
  return h;
}

// 1. rmse^2 == mse on random vectors, plus fixed rounded (rmse, mse) pairs.
Outcome metric_identity() {
  Rng rng(1);
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const auto n = static_cast<std::size_t>(rng.uniform_int(1, 200));
    std::vector<double> p(n), y(n);
    const double scale = std::pow(10.0, rng.uniform(-3, 3));
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = rng.uniform(-1, 1) * scale;
      p[i] = y[i] + rng.normal() * scale * 0.1;
    }
    const auto m = compute_metrics(p, y);
    worst = std::max(worst, std::abs(m.rmse * m.rmse - m.mse) / std::max(1.0, m.mse));
  }
  // (rmse, mse) as printed, train and test for DT, RF, GBM, NN.
  const std::vector<std::pair<double, double>> table{{2.398, 5.750}, {2.003, 4.012}, {1.219, 1.486},
                                                     {1.161, 1.348}, {2.398, 5.750}, {2.207, 4.871},
                                                     {1.65, 2.723},  {1.601, 2.563}};
  bool table_ok = true;
  for (auto [rmse, mse] : table) table_ok = table_ok && std::abs(std::round(rmse * rmse * 1000) - mse * 1000) <= 1;
  return {worst <= 1e-9 && table_ok,
          "max scaled |rmse^2-mse| " + std::to_string(worst) + ", table pairs " + (table_ok ? "consistent" : "INCONSISTENT")};
}

// 2. Random-search samples stay inside the closed ranges; integer ends are hit.
Outcome hyperparameter_ranges() {
  std::set<int> est, depth, split;
  double sub_lo = 1e9, sub_hi = -1e9, lr_lo = 1e9, lr_hi = -1e9;
  std::size_t outside = 0;
  for (std::size_t t = 0; t < 10000; ++t) {
    const auto spec = sample_trial_spec(Algorithm::GBM, 2024, t);
    const auto& g = std::get<GbmHyperParams>(spec.hyperparams);
    if (!within_search_ranges(g)) ++outside;
    est.insert(g.n_estimators);
    depth.insert(g.max_depth);
    split.insert(g.min_samples_split);
    sub_lo = std::min(sub_lo, g.subsample);
    sub_hi = std::max(sub_hi, g.subsample);
    lr_lo = std::min(lr_lo, g.learning_rate);
    lr_hi = std::max(lr_hi, g.learning_rate);
  }
  using R = SearchRanges;
  const bool ends = est.contains(R::kEstimatorsMin) && est.contains(R::kEstimatorsMax) &&
                    depth.contains(R::kDepthMin) && depth.contains(R::kDepthMax) &&
                    split.contains(R::kMinSplitMin) && split.contains(R::kMinSplitMax);
  return {outside == 0 && ends, std::to_string(outside) + " outside; integer ends " + (ends ? "hit" : "MISSED") +
                                    "; subsample [" + fmt(sub_lo) + ", " + fmt(sub_hi) + "], lr [" + fmt(lr_lo) +
                                    ", " + fmt(lr_hi) + "]"};
}

// 3. Five-fold partition covers each record once with balanced folds.
Outcome cv_partition() {
  bool ok = true;
  std::string detail;
  for (std::size_t n : {10, 11, 53}) {
    std::vector<int> seen(n, 0);
    std::size_t lo = n, hi = 0;
    for (const auto& fold : kfold_partition(n, 5, 7)) {
      lo = std::min(lo, fold.size());
      hi = std::max(hi, fold.size());
      for (auto i : fold) ++seen[i];
    }
    const bool once = std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; });
    ok = ok && once && hi - lo <= 1;
    detail += "n=" + std::to_string(n) + " sizes " + std::to_string(lo) + ".." + std::to_string(hi) + "; ";
  }
  return {ok, detail};
}

// 4. Two-point stump and monotone training error.
Outcome gbm_oracle() {
  const DesignSpace line("line", 1, {{"x", Continuous{0, 10, 1, ""}}});
  Dataset two{line, {}};
  for (auto [x, y] : {std::pair{0.0, 10.0}, std::pair{1.0, 20.0}}) {
    ExperimentRecord r;
    r.id = "T" + std::to_string(static_cast<int>(x));
    r.point.values = {{"x", x}};
    r.discharge_capacity = y;
    two.records.push_back(r);
  }
  const auto stump = train(ModelSpec{Algorithm::GBM, GbmHyperParams{1.0, 1, 1, 1.0, 2}, 0}, two);
  const auto preds = predict(stump, {DesignPoint{{{"x", 0.0}}}, DesignPoint{{{"x", 1.0}}}});
  const bool exact = preds[0] == 10.0 && preds[1] == 20.0;

  Dataset fixture{lab::benchmark_space(), {}};
  for (const auto& r : clean(seed7_history(), CleanPolicy::DiscardIncomplete).records) {
    if (fixture.records.size() == 50) break;
    fixture.records.push_back(r);
  }
  double last = std::numeric_limits<double>::infinity();
  int violations = 0;
  for (int n = 1; n <= 100; ++n) {
    const auto m = train(ModelSpec{Algorithm::GBM, GbmHyperParams{1.0, n, 3, 0.1, 2}, 0}, fixture);
    if (m.training_metrics().rmse > last) ++violations;
    last = m.training_metrics().rmse;
  }
  return {exact && violations == 0, "stump (" + fmt(preds[0], 1) + ", " + fmt(preds[1], 1) + "); " +
                                        std::to_string(violations) + " increases over 1..100 stages, final rmse " +
                                        fmt(last)};
}

// 5. Backprop gradient against central differences on five records.
Outcome mlp_gradient() {
  const auto& records = seed7_history().records;
  const auto space = lab::benchmark_space();
  const MlpShape shape{space.feature_count(), 8};
  std::vector<std::vector<double>> rows;
  std::vector<double> y;
  for (const auto& r : records) {
    if (!r.has_capacity()) continue;
    rows.push_back(encode_features(space, r.point));
    y.push_back(*r.discharge_capacity);
    if (rows.size() == 5) break;
  }
  // Standardise as the trainer does.
  std::vector<double> z;
  for (std::size_t c = 0; c < shape.inputs; ++c) {
    double mean = 0, var = 0;
    for (const auto& row : rows) mean += row[c] / 5.0;
    for (const auto& row : rows) var += (row[c] - mean) * (row[c] - mean) / 5.0;
    const double sd = var > 0 ? std::sqrt(var) : 1.0;
    for (auto& row : rows) row[c] = (row[c] - mean) / sd;
  }
  for (const auto& row : rows) z.insert(z.end(), row.begin(), row.end());
  const double ym = std::accumulate(y.begin(), y.end(), 0.0) / 5.0;
  for (auto& v : y) v -= ym;

  Rng rng(5);
  std::vector<double> params(shape.parameter_count());
  for (auto& p : params) p = rng.normal() * 0.5;
  std::vector<double> grad(params.size());
  (void)mlp_loss_gradient(shape, params, z, y, grad);
  double worst = 0.0;
  const double eps = 1e-6;
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto plus = params, minus = params;
    plus[i] += eps;
    minus[i] -= eps;
    const double fd = (mlp_loss(shape, plus, z, y) - mlp_loss(shape, minus, z, y)) / (2 * eps);
    const double denom = std::max(std::abs(fd), std::abs(grad[i]));
    if (denom == 0.0) continue;
    worst = std::max(worst, std::abs(fd - grad[i]) / denom);
  }
  return {worst <= 1e-4, std::to_string(params.size()) + " parameters, max relative error " + std::to_string(worst)};
}

// 6. Swarm against exhaustive search on the benchmark grid.
Outcome pso_vs_brute() {
  const auto training = clean(seed7_history(), CleanPolicy::DiscardIncomplete);
  const auto tuned = random_search(Algorithm::GBM, training, 60, 7).best;
  const auto model = train(tuned, training);
  const auto space = lab::benchmark_space();
  const auto brute = brute_force(model, space, 10, 100000);
  double brute_mean = 0;
  for (const auto& c : brute) brute_mean += c.predicted_capacity / 10.0;

  int top1 = 0;
  double worst_ratio = 1e9;
  PsoConfig cfg;
  cfg.n_iterations = 200;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    cfg.seed = seed;
    const auto got = optimize(model, space, cfg, 10);
    if (got.front().predicted_capacity == brute.front().predicted_capacity) ++top1;
    double mean = 0;
    for (const auto& c : got) mean += c.predicted_capacity / 10.0;
    worst_ratio = std::min(worst_ratio, mean / brute_mean);
  }
  PsoConfig full;
  full.seed = 1000;
  const auto t0 = Clock::now();
  const auto once = optimize(model, space, full, 10);
  const double full_secs = seconds_since(t0);
  const bool full_ok = once.front().predicted_capacity == brute.front().predicted_capacity;
  return {top1 >= 95 && worst_ratio >= 0.995 && full_ok,
          "top-1 agreement " + std::to_string(top1) + "/100, worst top-10 mean ratio " + fmt(worst_ratio, 5) +
              ", 1000-iteration run " + (full_ok ? "agrees" : "DISAGREES") + " (" + fmt(full_secs, 2) + " s)"};
}

// 7. Closed loop on the virtual lab through the CLI, plus seeds 1..10.
Outcome closed_loop() {
  const auto dir = scratch("loop");
  const auto t0 = Clock::now();
  const int rc = sh("simulate --history 300 --iterations 2 --seed 7 --outdir \"" + dir.string() + "\"");
  const double secs = seconds_since(t0);
  if (rc != 0) return {false, "simulate exited with " + std::to_string(rc)};
  const auto state = load_state((dir / "state.json").string());
  const auto& it1 = state.iterations.at(0);
  const auto& it2 = state.iterations.at(1);
  double history_best = -1e9;
  for (const auto& r : seed7_history().records) history_best = std::max(history_best, lab::true_capacity(r.point));
  const double best = std::max(*it1.best_measured, *it2.best_measured);
  const bool a = *it2.batch_mape < *it1.batch_mape;
  const bool b = best - history_best >= 2.0;
  bool c = false;
  for (const auto* it : {&it1, &it2})
    for (const auto& p : it->proposals)
      c = c || std::abs(std::get<double>(p.point.values.at(std::string(lab::kCoating))) - 430.0) >= 50.0;

  int decreasing = 0;
  std::string per_seed;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    CampaignConfig cfg;
    cfg.seed = seed;
    const auto sim = simulate(lab::OracleConfig{}, 300, 2, cfg);
    const double m1 = *sim.state.iterations[0].batch_mape, m2 = *sim.state.iterations[1].batch_mape;
    if (m2 < m1) ++decreasing;
    per_seed += " " + std::to_string(seed) + ":" + fmt(m1, 2) + "->" + fmt(m2, 2);
  }
  fs::remove_all(dir);
  const bool ok = a && b && c && decreasing >= 8 && secs < 300;
  return {ok, "seed 7: MAPE " + fmt(*it1.batch_mape, 3) + " -> " + fmt(*it2.batch_mape, 3) + " (" +
                  (a ? "ok" : "FAIL") + "), best " + fmt(best, 2) + " vs history " + fmt(history_best, 2) + " (" +
                  (b ? "ok" : "FAIL") + "), off-cluster proposal " + (c ? "ok" : "FAIL") + ", " + fmt(secs, 1) +
                  " s; MAPE decreased in " + std::to_string(decreasing) + "/10 seeds [" + per_seed + " ]"};
}

// 8. Bias pathologies on the seed-7 history.
Outcome bias_diagnostics() {
  const auto report = bias_report(seed7_history(), 10);
  const auto& coat = report.at(lab::kCoating);
  const auto& nb = report.at(lab::kNb);
  const bool ok = coat.mode_fraction >= 0.6 && coat.skewed && nb.one_value && report.censoring_rate > 0;
  return {ok, "coating mode fraction " + fmt(coat.mode_fraction, 3) + ", skewness " + fmt(coat.skewness, 2) +
                  (coat.skewed ? " (flagged)" : " (not flagged)") + ", d_Nb one_value " +
                  (nb.one_value ? "yes" : "no") + ", censoring rate " + fmt(report.censoring_rate, 3)};
}

// 9. Byte-identical reruns of commands and campaign replay.
Outcome determinism() {
  const auto root = scratch("determinism");
  const std::string sim = "simulate --history 120 --iterations 2 --batch-size 6 --trials 8 --pso-particles 40 "
                          "--pso-iterations 100 --seed 11 --outdir ";
  bool ok = sh(sim + "\"" + (root / "a").string() + "\"") == 0 && sh(sim + "\"" + (root / "b").string() + "\"") == 0;
  ok = ok && snapshot(root / "a") == snapshot(root / "b");
  const bool replay_ok = ok && sh("replay --state \"" + (root / "a" / "state.json").string() + "\" --out \"" +
                                  (root / "replayed.json").string() + "\"") == 0 &&
                         read_file((root / "replayed.json").string()) == read_file((root / "a" / "state.json").string());

  write_file_atomic((root / "space.json").string(), lab::benchmark_space().to_json().dump(1));
  const std::string csv = (root / "a" / "history.csv").string();
  bool others = true;
  for (const char* tag : {"x", "y"}) {
    const auto out = root / tag;
    fs::create_directories(out);
    others = others &&
             sh("ingest --csv \"" + csv + "\" --space \"" + (root / "space.json").string() + "\" --out \"" +
                (out / "data.json").string() + "\"") == 0 &&
             sh("diagnose --dataset \"" + (out / "data.json").string() + "\" --out \"" + (out / "diag").string() +
                "\"") == 0 &&
             sh("tune --dataset \"" + (out / "data.json").string() + "\" --trials 6 --seed 3 --out \"" +
                (out / "tune").string() + "\"") == 0 &&
             sh("train --dataset \"" + (out / "data.json").string() + "\" --algo rf --seed 3 --out \"" +
                (out / "train").string() + "\"") == 0 &&
             sh("report --state \"" + (root / "a" / "state.json").string() + "\" --kind distributions --out \"" +
                (out / "dist").string() + "\"") == 0;
  }
  others = others && snapshot(root / "x") == snapshot(root / "y");
  fs::remove_all(root);
  return {ok && replay_ok && others, std::string("simulate ") + (ok ? "identical" : "DIFFERS") + ", replay " +
                                         (replay_ok ? "identical" : "DIFFERS") + ", ingest/diagnose/tune/train/report " +
                                         (others ? "identical" : "DIFFER")};
}

// 10. Tuned GBM beats an untuned decision tree on held-out data.
Outcome model_ordering() {
  const auto training = clean(seed7_history(), CleanPolicy::DiscardIncomplete);
  int wins = 0;
  std::string detail;
  auto held_out = [](const TrainedModel& m, const Dataset& test) {
    std::vector<DesignPoint> pts;
    std::vector<double> y;
    for (const auto& r : test.records) {
      pts.push_back(r.point);
      y.push_back(*r.discharge_capacity);
    }
    return compute_metrics(predict(m, pts), y).rmse;
  };
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto parts = split(training, 0.2, seed);
    const auto gbm = train(random_search(Algorithm::GBM, parts.train, 60, seed).best, parts.train);
    const auto dt = train(ModelSpec::defaults(Algorithm::DT, seed), parts.train);
    const double g = held_out(gbm, parts.test), d = held_out(dt, parts.test);
    if (g < d) ++wins;
    detail += " " + fmt(g, 2) + "/" + fmt(d, 2);
  }
  return {wins >= 9, "tuned GBM < default DT in " + std::to_string(wins) + "/10 seeds [gbm/dt rmse:" + detail + " ]"};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: kilnloop_acceptance <path-to-kilnloop>\n";
    return 2;
  }
  g_cli = argv[1];

  struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "metric identity", 1, metric_identity},
      {2, "hyperparameter ranges", 5, hyperparameter_ranges},
      {3, "five-fold partition", 1, cv_partition},
      {4, "GBM hand oracle", 5, gbm_oracle},
      {5, "MLP gradient check", 1, mlp_gradient},
      {6, "PSO vs brute force", 120, pso_vs_brute},
      {7, "closed-loop campaign", 600, closed_loop},
      {8, "bias diagnostics", 1, bias_diagnostics},
      {9, "determinism and replay", 0, determinism},
      {10, "tuned GBM vs default DT", 180, model_ordering},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = seconds_since(t0);
    const bool in_budget = c.budget_s <= 0 || secs < c.budget_s;
    const bool pass = o.pass && in_budget;
    if (!pass) ++failures;
    std::printf("[%s] criterion %d %s (%.2f s%s): %s\n", pass ? "PASS" : "FAIL", c.id, c.name, secs,
                in_budget ? "" : ", over budget", o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
