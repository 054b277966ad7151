#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"
#include "kilnloop/dataset.hpp"
#include "kilnloop/design_space.hpp"
#include "kilnloop/metrics.hpp"
#include "kilnloop/mlp.hpp"
#include "kilnloop/rng.hpp"
#include "kilnloop/tree.hpp"

namespace kilnloop {

enum class Algorithm { DT, RF, GBM, MLP };

std::string_view to_string(Algorithm algorithm);
/// Accepts "dt", "rf", "gbm", "mlp" (any case) and "nn" for the MLP.
std::optional<Algorithm> parse_algorithm(std::string_view text);

struct DtParams {
  int max_depth = 0;  // 0: unlimited
  int min_samples_split = 2;

  bool operator==(const DtParams&) const = default;
};

struct RfParams {
  int n_trees = 100;
  int max_depth = 0;
  int min_samples_split = 2;
  int max_features = 0;  // 0: ceil(d / 3)
  bool bootstrap = true;

  bool operator==(const RfParams&) const = default;
};

struct GbmHyperParams {
  double subsample = 1.0;
  int n_estimators = 100;
  int max_depth = 3;
  double learning_rate = 0.1;
  int min_samples_split = 2;

  bool operator==(const GbmHyperParams&) const = default;
};

/// Closed search ranges used by random_search.
struct SearchRanges {
  static constexpr double kSubsampleMin = 0.01, kSubsampleMax = 1.0;
  static constexpr int kEstimatorsMin = 50, kEstimatorsMax = 300;
  static constexpr int kDepthMin = 3, kDepthMax = 8;
  static constexpr double kLearningRateMin = 0.001, kLearningRateMax = 0.2;
  static constexpr int kMinSplitMin = 2, kMinSplitMax = 9;
};

bool within_search_ranges(const GbmHyperParams& p);

GbmHyperParams sample_gbm(Rng& rng);
DtParams sample_dt(Rng& rng);
RfParams sample_rf(Rng& rng);

using Hyperparams = std::variant<DtParams, RfParams, GbmHyperParams, MlpParams>;

struct ModelSpec {
  Algorithm algorithm = Algorithm::GBM;
  Hyperparams hyperparams = GbmHyperParams{};
  std::uint64_t seed = 0;

  /// Untuned defaults for an algorithm.
  static ModelSpec defaults(Algorithm algorithm, std::uint64_t seed = 0);

  /// Throws Error(InvalidHyperparams) on a kind mismatch or an unusable value.
  void validate() const;

  nlohmann::ordered_json to_json() const;
  static ModelSpec from_json(const nlohmann::json& j);

  bool operator==(const ModelSpec&) const = default;
};

struct ForestModel {
  std::vector<RegressionTree> trees;
  double predict(const double* x) const;
};

struct GbmModel {
  double initial = 0.0;
  double learning_rate = 0.1;
  std::vector<RegressionTree> trees;
  double predict(const double* x) const;
};

using FittedState = std::variant<RegressionTree, ForestModel, GbmModel, MlpModel>;

class TrainedModel {
 public:
  TrainedModel(ModelSpec spec, DesignSpace space, FittedState state, MetricsRow training);

  const ModelSpec& spec() const { return spec_; }
  const DesignSpace& space() const { return space_; }
  const MetricsRow& training_metrics() const { return training_; }
  const FittedState& state() const { return state_; }

  /// Prediction on an already-encoded feature row (feature_count() values).
  double predict_features(const double* features) const;

  nlohmann::ordered_json to_json() const;
  static TrainedModel from_json(const nlohmann::json& j);
  void save(const std::string& path) const;
  static TrainedModel load(const std::string& path);

 private:
  ModelSpec spec_;
  DesignSpace space_;
  FittedState state_;
  MetricsRow training_;
};

/// Fits on the capacity-bearing records of `train`.
TrainedModel train(const ModelSpec& spec, const Dataset& train);

/// Throws Error(SpaceMismatch) if any point is not valid in the model's space.
std::vector<double> predict(const TrainedModel& model, const std::vector<DesignPoint>& points);

struct CvResult {
  std::vector<MetricsRow> folds;
  MetricsRow mean;
  std::vector<std::vector<std::string>> fold_ids;  // validation ids per fold
};

/// Fold partition used by kfold_cv: positions into the capacity-bearing
/// records, shuffled once by seed, split into k contiguous folds.
std::vector<std::vector<std::size_t>> kfold_partition(std::size_t n, std::size_t k, std::uint64_t seed);

CvResult kfold_cv(const ModelSpec& spec, const Dataset& data, std::size_t k, std::uint64_t seed);

struct Trial {
  ModelSpec spec;
  double mean_rmse = 0.0;
};

struct SearchResult {
  ModelSpec best;
  std::size_t best_index = 0;
  std::vector<Trial> trials;
};

/// Draws the i-th trial's spec; trial specs depend only on (seed, i).
ModelSpec sample_trial_spec(Algorithm algorithm, std::uint64_t seed, std::size_t trial);

/// Random search scored by k-fold mean rmse; earliest trial wins ties.
SearchResult random_search(Algorithm algorithm, const Dataset& data, std::size_t n_trials,
                           std::uint64_t seed, std::size_t k = 5);

std::string trial_log_csv(const SearchResult& result);

}  // namespace kilnloop
