#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "kilnloop/dataset.hpp"
#include "kilnloop/design_space.hpp"
#include "kilnloop/pso.hpp"
#include "kilnloop/surrogate.hpp"
#include "kilnloop/virtual_lab.hpp"

namespace kilnloop {

struct CampaignConfig {
  std::size_t batch_size = 10;
  std::size_t tuning_trials = 60;
  std::size_t cv_folds = 5;
  Algorithm surrogate_algorithm = Algorithm::GBM;
  PsoConfig pso;
  std::uint64_t seed = 0;

  /// Throws Error(InvalidConfig).
  void validate() const;

  nlohmann::ordered_json to_json() const;
  static CampaignConfig from_json(const nlohmann::json& j);

  bool operator==(const CampaignConfig&) const = default;
};

struct IterationRecord {
  int index = 0;
  ModelSpec chosen_spec;
  double chosen_cv_rmse = 0.0;
  std::vector<Candidate> proposals;
  std::vector<std::string> result_ids;  // ledger ids in rank order
  std::optional<double> batch_mape;     // percent
  std::optional<double> best_measured;  // mAh/g
  bool closed = false;
};

struct CampaignState {
  CampaignConfig config;
  DesignSpace space;
  Dataset ledger;
  std::vector<IterationRecord> iterations;
  std::string model_artifact;              // path relative to the state file
  std::optional<lab::OracleConfig> oracle;  // set by simulated campaigns

  const IterationRecord* open_iteration() const;
  const ExperimentRecord& record(const std::string& id) const;

  nlohmann::ordered_json to_json() const;
  static CampaignState from_json(const nlohmann::json& j);
};

/// Needs enough capacity-bearing records for k-fold tuning.
CampaignState init(const Dataset& dataset, const DesignSpace& space, const CampaignConfig& config);

struct Proposal {
  CampaignState state;
  TrainedModel model;
  std::string sheet_csv;
};

/// Tunes and trains on the capacity-bearing ledger, runs the swarm and opens
/// the next iteration. Already-measured ledger points are never proposed.
Proposal propose(const CampaignState& state);

/// Closes the open iteration from a results sheet with columns
/// iteration, rank, status, discharge_capacity_mAh_g. A row with an empty
/// rank may name the point through the parameter columns instead.
CampaignState record(const CampaignState& state, std::string_view results_csv);

/// Mean of |predicted - measured| / measured * 100 over the pairs.
double batch_mape(const std::vector<double>& predicted, const std::vector<double>& measured);

struct IterationSummary {
  int iteration = 0;
  std::size_t proposals = 0;
  std::size_t measured = 0;
  std::optional<double> batch_mape;
  std::optional<double> best_measured;
  std::optional<double> min_measured;
  std::optional<double> max_measured;
};

struct ScatterRow {
  int iteration = 0;
  int rank = 0;
  std::string id;
  double predicted = 0.0;
  std::optional<double> measured;
  Status status = Status::Complete;
};

struct CampaignReport {
  std::vector<IterationSummary> iterations;
  std::vector<ScatterRow> scatter;  // every result row of closed iterations
  std::optional<double> history_best_measured;

  nlohmann::ordered_json to_json() const;
  /// iteration, rank, predicted, measured, status
  std::string scatter_csv() const;
};

/// Throws Error(NoClosedIterations).
CampaignReport campaign_report(const CampaignState& state);

/// Predicted-vs-measured rows for every measured ledger record, grouped as
/// historical-train / historical-test (zero-shot model on a seeded split of
/// the history) or proposed:k (the prediction made when proposing).
/// Columns: group, id, iteration, rank, predicted, measured, status.
std::string provenance_scatter_csv(const CampaignState& state, double test_fraction = 0.2);

/// One table per parameter with a count column per provenance group.
/// Numeric parameters: bin_left, bin_right, counts...; others: level, counts...
std::vector<std::pair<std::string, std::string>> provenance_distributions(const CampaignState& state,
                                                                          std::size_t bins);

// State files.

/// Exclusive advisory lock on "<state>.lock"; throws Error(StateLocked) if
/// another process holds it.
class StateLock {
 public:
  explicit StateLock(const std::string& state_path);
  ~StateLock();
  StateLock(const StateLock&) = delete;
  StateLock& operator=(const StateLock&) = delete;

 private:
  int fd_ = -1;
};

/// Writes to a sibling temporary file and renames it into place.
void write_file_atomic(const std::string& path, std::string_view contents);
std::string read_file(const std::string& path);

void save_state(const CampaignState& state, const std::string& path);
CampaignState load_state(const std::string& path);

// Closed-loop simulation against the virtual lab.

struct SimulationResult {
  CampaignState state;
  std::optional<TrainedModel> model;  // surrogate of the last iteration
  std::vector<std::string> sheets;    // proposal sheet per iteration
  std::vector<std::string> results;   // results sheet per iteration
};

/// Results sheet for the open iteration, measured by the oracle.
std::string measure_open_iteration(const CampaignState& state, const lab::OracleConfig& oracle);

/// History of `history` records from gen seed config.seed, then `iterations`
/// propose/measure/record cycles.
SimulationResult simulate(const lab::OracleConfig& oracle, std::size_t history, std::size_t iterations,
                          const CampaignConfig& config);

/// Re-runs a simulated campaign from its stored config, oracle and history.
SimulationResult replay(const CampaignState& state);

}  // namespace kilnloop
