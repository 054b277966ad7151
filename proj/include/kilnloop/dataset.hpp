#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "kilnloop/design_space.hpp"

namespace kilnloop {

enum class Status { Complete, Partial, Failed };

std::string_view to_string(Status status);
std::optional<Status> parse_status(std::string_view text);

/// Where a record came from: the historical archive (iteration 0) or the
/// active-learning iteration that proposed it.
struct Provenance {
  int iteration = 0;

  static Provenance historical() { return {}; }
  static Provenance proposed(int k) { return {k}; }
  bool is_historical() const { return iteration == 0; }
  std::string label() const;
  static std::optional<Provenance> parse(std::string_view text);

  bool operator==(const Provenance&) const = default;
};

struct ExperimentRecord {
  std::string id;
  DesignPoint point;
  std::optional<double> discharge_capacity;  // mAh/g; absent when censored
  Status status = Status::Complete;
  Provenance provenance;
  std::optional<std::string> notes;

  bool has_capacity() const { return discharge_capacity.has_value(); }
  bool operator==(const ExperimentRecord&) const = default;
};

struct Dataset {
  DesignSpace space;
  std::vector<ExperimentRecord> records;

  std::size_t capacity_count() const;
  /// Records with a measured capacity, in ledger order.
  Dataset capacity_bearing() const;
};

/// Row-major feature matrix and targets of the capacity-bearing records.
struct TrainingMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> x;
  std::vector<double> y;

  const double* row(std::size_t i) const { return x.data() + i * cols; }
};

TrainingMatrix training_matrix(const Dataset& data);

inline constexpr std::string_view kIdColumn = "id";
inline constexpr std::string_view kStatusColumn = "status";
inline constexpr std::string_view kCapacityColumn = "discharge_capacity_mAh_g";
inline constexpr std::string_view kProvenanceColumn = "provenance";
inline constexpr std::string_view kNotesColumn = "notes";

struct IngestIssue {
  std::size_t row = 0;  // 1-based data row
  std::string column;
  std::string message;
};

struct IngestResult {
  Dataset dataset;
  std::vector<IngestIssue> issues;
};

/// Reads experiment rows. Rows whose present design values break the space
/// are reported as issues and left out; empty design cells are kept as
/// absent fields for clean() to resolve.
IngestResult ingest_csv(const std::string& path, const DesignSpace& space);
IngestResult ingest_csv_text(std::string_view text, const DesignSpace& space);

std::string to_csv(const Dataset& data);

enum class CleanPolicy { DiscardIncomplete, ImputeMedian };

std::optional<CleanPolicy> parse_clean_policy(std::string_view text);

/// Training view of the data. Capacities are never imputed or altered.
Dataset clean(const Dataset& data, CleanPolicy policy = CleanPolicy::DiscardIncomplete);

struct Split {
  Dataset train;
  Dataset test;
};

Split split(const Dataset& data, double test_fraction, std::uint64_t seed);

struct Histogram {
  std::vector<double> edges;        // bins + 1 edges for numeric parameters
  std::vector<std::string> labels;  // one per bin for categorical/fixed-string
  std::vector<std::size_t> counts;
};

struct ParameterDiagnostics {
  std::string name;
  std::string kind;
  std::size_t count = 0;
  Histogram histogram;
  double skewness = 0.0;
  double mode_fraction = 0.0;
  bool one_value = false;
  bool near_fixated = false;  // mode_fraction above kNearFixationThreshold
  bool skewed = false;        // |skewness| at or above kSkewThreshold
};

inline constexpr double kNearFixationThreshold = 0.95;
inline constexpr double kSkewThreshold = 1.0;

struct BiasReport {
  std::size_t record_count = 0;
  std::vector<ParameterDiagnostics> parameters;
  std::map<std::string, std::size_t> subgroup_counts;
  double censoring_rate = 0.0;

  const ParameterDiagnostics& at(std::string_view name) const;
  std::vector<std::string> fixated() const;
  nlohmann::ordered_json to_json() const;
};

/// Bias-uncorrected third standardised moment; 0 for zero-variance samples.
double sample_skewness(const std::vector<double>& values);

BiasReport bias_report(const Dataset& data, std::size_t bins,
                       const std::vector<std::string>& subgroup_parameters = {});

nlohmann::ordered_json record_to_json(const DesignSpace& space, const ExperimentRecord& record);
ExperimentRecord record_from_json(const nlohmann::json& j);

/// {"format": "kilnloop-dataset", "version", "space", "records"}.
nlohmann::ordered_json dataset_to_json(const Dataset& data);
/// Re-validates ids and points against the embedded space.
Dataset dataset_from_json(const nlohmann::json& j);
void save_dataset(const Dataset& data, const std::string& path);
Dataset load_dataset(const std::string& path);

}  // namespace kilnloop
