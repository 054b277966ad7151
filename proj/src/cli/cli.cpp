#include "kilnloop/cli.hpp"

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "kilnloop/campaign.hpp"
#include "kilnloop/csv.hpp"
#include "kilnloop/dataset.hpp"
#include "kilnloop/error.hpp"
#include "kilnloop/metrics.hpp"
#include "kilnloop/pso.hpp"
#include "kilnloop/surrogate.hpp"
#include "kilnloop/virtual_lab.hpp"

namespace kilnloop::cli {
namespace fs = std::filesystem;

namespace {

std::uint64_t default_seed() {
  const char* env = std::getenv("KILNLOOP_SEED");
  if (!env || !*env) return 0;
  std::uint64_t seed = 0;
  const std::string_view text(env);
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), seed);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw Error(ErrorCode::InvalidConfig, "KILNLOOP_SEED must be a non-negative integer");
  return seed;
}

std::string json_text(const nlohmann::ordered_json& j) { return j.dump(1) + "\n"; }

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create directory " + dir);
}

std::string join(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

Algorithm algorithm_flag(const std::string& text) {
  auto algo = parse_algorithm(text);
  if (!algo) throw Error(ErrorCode::InvalidConfig, "unknown algorithm '" + text + "' (dt, rf, gbm, mlp)");
  return *algo;
}

CleanPolicy policy_flag(const std::string& text) {
  auto policy = parse_clean_policy(text);
  if (!policy) throw Error(ErrorCode::InvalidConfig, "unknown clean policy '" + text + "'");
  return *policy;
}

nlohmann::ordered_json metrics_json(const MetricsRow& train_row, const MetricsRow& test_row,
                                    std::size_t n_train, std::size_t n_test) {
  nlohmann::ordered_json j;
  j["train"] = train_row.to_json();
  j["train"]["records"] = n_train;
  j["test"] = test_row.to_json();
  j["test"]["records"] = n_test;
  return j;
}

MetricsRow evaluate(const TrainedModel& model, const Dataset& data) {
  std::vector<DesignPoint> points;
  std::vector<double> actual;
  for (const auto& r : data.records) {
    points.push_back(r.point);
    actual.push_back(*r.discharge_capacity);
  }
  return compute_metrics(predict(model, points), actual);
}

// Shared flags of the model commands.
struct ModelArgs {
  std::string dataset;
  std::string algo = "gbm";
  std::string policy = "discard";
  std::string out;
  std::optional<std::uint64_t> seed;
  double test_fraction = 0.2;
};

void add_model_flags(CLI::App* cmd, ModelArgs& a) {
  cmd->add_option("--dataset", a.dataset, "Dataset JSON written by ingest")->required();
  cmd->add_option("--algo", a.algo, "dt, rf, gbm or mlp")->capture_default_str();
  cmd->add_option("--policy", a.policy, "discard or impute")->capture_default_str();
  cmd->add_option("--test-fraction", a.test_fraction, "Held-out share of capacity-bearing records")
      ->capture_default_str();
  cmd->add_option("--seed", a.seed, "Seed (default: KILNLOOP_SEED or 0)");
  cmd->add_option("--out", a.out, "Output directory")->required();
}

struct Prepared {
  Split parts;
  std::uint64_t seed;
  Algorithm algo;
};

Prepared prepare(const ModelArgs& a) {
  const Algorithm algo = algorithm_flag(a.algo);
  const std::uint64_t seed = a.seed.value_or(default_seed());
  const Dataset data = load_dataset(a.dataset);
  const Dataset training = clean(data, policy_flag(a.policy));
  return {split(training, a.test_fraction, seed), seed, algo};
}

void write_model_outputs(const std::string& out, const TrainedModel& model, const Split& parts) {
  write_file_atomic(join(out, "model.json"), json_text(model.to_json()));
  write_file_atomic(join(out, "metrics.json"),
                    json_text(metrics_json(model.training_metrics(), evaluate(model, parts.test),
                                           parts.train.records.size(), parts.test.records.size())));
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"kilnloop: surrogate-guided active-learning campaigns for cathode synthesis"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every command");

  // ingest
  std::string ingest_csv_path, ingest_space, ingest_out, ingest_training_out, ingest_policy = "discard";
  auto* ingest = app.add_subcommand("ingest", "Read an experiment CSV into a dataset JSON");
  ingest->add_option("--csv", ingest_csv_path, "Experiment CSV")->required();
  ingest->add_option("--space", ingest_space, "Design space JSON")->required();
  ingest->add_option("--out", ingest_out, "Dataset JSON (full ledger)")->required();
  ingest->add_option("--training-out", ingest_training_out, "Optional cleaned training view JSON");
  ingest->add_option("--policy", ingest_policy, "discard or impute")->capture_default_str();

  // diagnose
  std::string diag_dataset, diag_out;
  std::size_t diag_bins = 10;
  std::vector<std::string> diag_subgroups;
  auto* diagnose = app.add_subcommand("diagnose", "Bias report and per-parameter histograms");
  diagnose->add_option("--dataset", diag_dataset, "Dataset JSON")->required();
  diagnose->add_option("--bins", diag_bins, "Histogram bins")->capture_default_str();
  diagnose->add_option("--subgroup", diag_subgroups, "Parameter whose values form subgroups (repeatable)");
  diagnose->add_option("--out", diag_out, "Output directory")->required();

  // tune / train
  ModelArgs tune_args;
  std::size_t tune_trials = 60, tune_folds = 5;
  auto* tune = app.add_subcommand("tune", "Random-search hyperparameters by k-fold CV, then train");
  add_model_flags(tune, tune_args);
  tune->add_option("--trials", tune_trials, "Random-search trials")->capture_default_str();
  tune->add_option("--folds", tune_folds, "Cross-validation folds")->capture_default_str();

  ModelArgs train_args;
  std::string train_spec;
  auto* train_cmd = app.add_subcommand("train", "Train one model spec");
  add_model_flags(train_cmd, train_args);
  train_cmd->add_option("--spec", train_spec, "Model spec JSON (default: untuned defaults of --algo)");

  // init
  std::string init_dataset, init_out, init_algo = "gbm", init_config;
  std::optional<std::uint64_t> init_seed;
  std::size_t init_batch = 10, init_trials = 60, init_particles = 100, init_iters = 1000;
  auto* init_cmd = app.add_subcommand("init", "Start a campaign state from a dataset");
  init_cmd->add_option("--dataset", init_dataset, "Dataset JSON")->required();
  init_cmd->add_option("--out", init_out, "State file to create")->required();
  init_cmd->add_option("--config", init_config, "Campaign config JSON (overrides the flags below)");
  init_cmd->add_option("--algo", init_algo, "Surrogate algorithm")->capture_default_str();
  init_cmd->add_option("--batch-size", init_batch, "Proposals per iteration")->capture_default_str();
  init_cmd->add_option("--trials", init_trials, "Tuning trials per iteration")->capture_default_str();
  init_cmd->add_option("--pso-particles", init_particles, "Swarm size")->capture_default_str();
  init_cmd->add_option("--pso-iterations", init_iters, "Swarm iterations")->capture_default_str();
  init_cmd->add_option("--seed", init_seed, "Seed (default: KILNLOOP_SEED or 0)");

  // propose / record
  std::string propose_state, propose_out;
  auto* propose_cmd = app.add_subcommand("propose", "Open the next iteration and write its proposal sheet");
  propose_cmd->add_option("--state", propose_state, "State file")->required();
  propose_cmd->add_option("--out", propose_out, "Proposal sheet CSV")->required();

  std::string record_state, record_results;
  auto* record_cmd = app.add_subcommand("record", "Close the open iteration from a results CSV");
  record_cmd->add_option("--state", record_state, "State file")->required();
  record_cmd->add_option("--results", record_results, "Results CSV")->required();

  // simulate
  std::string sim_oracle, sim_outdir;
  std::size_t sim_history = 300, sim_iterations = 2, sim_batch = 10, sim_trials = 60, sim_particles = 100,
              sim_swarm_iters = 1000;
  std::optional<std::uint64_t> sim_seed;
  auto* simulate_cmd = app.add_subcommand("simulate", "Run a closed-loop campaign against the virtual lab");
  simulate_cmd->add_option("--oracle", sim_oracle, "Oracle config JSON (default: built-in)");
  simulate_cmd->add_option("--history", sim_history, "Biased history size")->capture_default_str();
  simulate_cmd->add_option("--iterations", sim_iterations, "Active-learning iterations")->capture_default_str();
  simulate_cmd->add_option("--batch-size", sim_batch, "Proposals per iteration")->capture_default_str();
  simulate_cmd->add_option("--trials", sim_trials, "Tuning trials per iteration")->capture_default_str();
  simulate_cmd->add_option("--pso-particles", sim_particles, "Swarm size")->capture_default_str();
  simulate_cmd->add_option("--pso-iterations", sim_swarm_iters, "Swarm iterations")->capture_default_str();
  simulate_cmd->add_option("--seed", sim_seed, "Seed (default: KILNLOOP_SEED or 0)");
  simulate_cmd->add_option("--outdir", sim_outdir, "Output directory")->required();

  // replay
  std::string replay_state, replay_out;
  auto* replay_cmd = app.add_subcommand("replay", "Re-run a simulated campaign from its state file");
  replay_cmd->add_option("--state", replay_state, "State file written by simulate")->required();
  replay_cmd->add_option("--out", replay_out, "Reconstructed state file")->required();

  // report
  std::string report_state, report_kind, report_out;
  std::size_t report_bins = 10;
  auto* report_cmd = app.add_subcommand("report", "Plot-ready campaign data");
  report_cmd->add_option("--state", report_state, "State file")->required();
  report_cmd->add_option("--kind", report_kind, "scatter, distributions or iterations")->required();
  report_cmd->add_option("--bins", report_bins, "Histogram bins for distributions")->capture_default_str();
  report_cmd->add_option("--out", report_out, "Output file (directory for distributions)")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(std::move(reversed));
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUserError;
  }

  try {
    if (*ingest) {
      const DesignSpace space = DesignSpace::load(ingest_space);
      const IngestResult result = ingest_csv(ingest_csv_path, space);
      for (const auto& issue : result.issues)
        std::cerr << "issue: row " << issue.row << ", column '" << issue.column << "': " << issue.message << "\n";
      write_file_atomic(ingest_out, json_text(dataset_to_json(result.dataset)));
      if (!ingest_training_out.empty())
        write_file_atomic(ingest_training_out,
                          json_text(dataset_to_json(clean(result.dataset, policy_flag(ingest_policy)))));
      std::cerr << "ingested " << result.dataset.records.size() << " records (" << result.dataset.capacity_count()
                << " with capacity), " << result.issues.size() << " issues\n";
    } else if (*diagnose) {
      const Dataset data = load_dataset(diag_dataset);
      const BiasReport report = bias_report(data, diag_bins, diag_subgroups);
      ensure_dir(diag_out);
      write_file_atomic(join(diag_out, "bias_report.json"), json_text(report.to_json()));
      for (const auto& p : report.parameters) {
        std::string text = csv::format_row({"bin_left", "bin_right", "count"});
        for (std::size_t b = 0; b < p.histogram.counts.size(); ++b) {
          const bool numeric = !p.histogram.edges.empty();
          const std::string left = numeric ? format_number(p.histogram.edges[b]) : p.histogram.labels[b];
          const std::string right = numeric ? format_number(p.histogram.edges[b + 1]) : p.histogram.labels[b];
          text += csv::format_row({left, right, std::to_string(p.histogram.counts[b])});
        }
        write_file_atomic(join(diag_out, "hist_" + p.name + ".csv"), text);
      }
      const auto fixated = report.fixated();
      std::cerr << "records " << report.record_count << ", censoring rate " << format_number(report.censoring_rate)
                << ", fixated parameters " << fixated.size() << "\n";
    } else if (*tune) {
      const Prepared prep = prepare(tune_args);
      const SearchResult search = random_search(prep.algo, prep.parts.train, tune_trials, prep.seed, tune_folds);
      const TrainedModel model = train(search.best, prep.parts.train);
      ensure_dir(tune_args.out);
      write_file_atomic(join(tune_args.out, "best_spec.json"), json_text(search.best.to_json()));
      write_file_atomic(join(tune_args.out, "trials.csv"), trial_log_csv(search));
      write_model_outputs(tune_args.out, model, prep.parts);
      std::cerr << "best trial " << search.best_index << ", mean CV rmse "
                << format_number(search.trials[search.best_index].mean_rmse) << "\n";
    } else if (*train_cmd) {
      const Prepared prep = prepare(train_args);
      ModelSpec spec = ModelSpec::defaults(prep.algo, prep.seed);
      if (!train_spec.empty()) spec = ModelSpec::from_json(nlohmann::json::parse(read_file(train_spec)));
      const TrainedModel model = train(spec, prep.parts.train);
      ensure_dir(train_args.out);
      write_file_atomic(join(train_args.out, "spec.json"), json_text(spec.to_json()));
      write_model_outputs(train_args.out, model, prep.parts);
      std::cerr << "training rmse " << format_number(model.training_metrics().rmse) << "\n";
    } else if (*init_cmd) {
      CampaignConfig config;
      if (!init_config.empty()) {
        config = CampaignConfig::from_json(nlohmann::json::parse(read_file(init_config)));
      } else {
        config.batch_size = init_batch;
        config.tuning_trials = init_trials;
        config.surrogate_algorithm = algorithm_flag(init_algo);
        config.pso.n_particles = init_particles;
        config.pso.n_iterations = init_iters;
        config.seed = init_seed.value_or(default_seed());
      }
      const Dataset data = load_dataset(init_dataset);
      StateLock lock(init_out);
      if (fs::exists(init_out)) throw Error(ErrorCode::InvalidConfig, init_out + " already exists");
      save_state(init(data, data.space, config), init_out);
      std::cerr << "campaign initialised with " << data.records.size() << " ledger records\n";
    } else if (*propose_cmd) {
      StateLock lock(propose_state);
      const CampaignState state = load_state(propose_state);
      Proposal p = propose(state);
      const std::string artifact = fs::path(propose_state).filename().string() + ".model.json";
      p.state.model_artifact = artifact;
      write_file_atomic(join(fs::path(propose_state).parent_path().string(), artifact), json_text(p.model.to_json()));
      write_file_atomic(propose_out, p.sheet_csv);
      save_state(p.state, propose_state);
      std::cerr << "iteration " << p.state.iterations.back().index << ": " << p.state.iterations.back().proposals.size()
                << " proposals\n";
    } else if (*record_cmd) {
      StateLock lock(record_state);
      const CampaignState state = load_state(record_state);
      const CampaignState next = record(state, csv::read_text(record_results));
      save_state(next, record_state);
      const auto& it = next.iterations.back();
      std::cout << "iteration " << it.index << " batch_mape "
                << (it.batch_mape ? format_number(*it.batch_mape) : std::string("n/a")) << " best_measured "
                << (it.best_measured ? format_number(*it.best_measured) : std::string("n/a")) << "\n";
    } else if (*simulate_cmd) {
      const lab::OracleConfig oracle = sim_oracle.empty() ? lab::OracleConfig{} : lab::OracleConfig::load(sim_oracle);
      CampaignConfig config;
      config.batch_size = sim_batch;
      config.tuning_trials = sim_trials;
      config.pso.n_particles = sim_particles;
      config.pso.n_iterations = sim_swarm_iters;
      config.seed = sim_seed.value_or(default_seed());
      SimulationResult result = simulate(oracle, sim_history, sim_iterations, config);
      ensure_dir(sim_outdir);
      result.state.model_artifact = "model.json";
      Dataset history{result.state.space, {}};
      for (const auto& r : result.state.ledger.records)
        if (r.provenance.is_historical()) history.records.push_back(r);
      write_file_atomic(join(sim_outdir, "history.csv"), to_csv(history));
      for (std::size_t i = 0; i < result.sheets.size(); ++i) {
        write_file_atomic(join(sim_outdir, "proposals_it" + std::to_string(i + 1) + ".csv"), result.sheets[i]);
        write_file_atomic(join(sim_outdir, "results_it" + std::to_string(i + 1) + ".csv"), result.results[i]);
      }
      write_file_atomic(join(sim_outdir, "model.json"), json_text(result.model->to_json()));
      const CampaignReport report = campaign_report(result.state);
      write_file_atomic(join(sim_outdir, "report.json"), json_text(report.to_json()));
      write_file_atomic(join(sim_outdir, "scatter.csv"), report.scatter_csv());
      save_state(result.state, join(sim_outdir, "state.json"));
      for (const auto& s : report.iterations)
        std::cout << "iteration " << s.iteration << " batch_mape "
                  << (s.batch_mape ? format_number(*s.batch_mape) : std::string("n/a")) << " best_measured "
                  << (s.best_measured ? format_number(*s.best_measured) : std::string("n/a")) << "\n";
    } else if (*replay_cmd) {
      const CampaignState state = load_state(replay_state);
      const SimulationResult result = replay(state);
      save_state(result.state, replay_out);
      std::cerr << "replayed " << result.sheets.size() << " iterations\n";
    } else if (*report_cmd) {
      const CampaignState state = load_state(report_state);
      if (report_kind == "iterations") {
        write_file_atomic(report_out, json_text(campaign_report(state).to_json()));
      } else if (report_kind == "scatter") {
        write_file_atomic(report_out, provenance_scatter_csv(state));
      } else if (report_kind == "distributions") {
        ensure_dir(report_out);
        for (const auto& [name, text] : provenance_distributions(state, report_bins))
          write_file_atomic(join(report_out, "dist_" + name + ".csv"), text);
      } else {
        throw Error(ErrorCode::InvalidConfig, "unknown report kind '" + report_kind +
                                                  "' (scatter, distributions, iterations)");
      }
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUserError;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUserError;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kInternalError;
  }
  return kOk;
}

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args);
}

}  // namespace kilnloop::cli
