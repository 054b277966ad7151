#include "kilnloop/surrogate.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>

#include "kilnloop/csv.hpp"
#include "kilnloop/error.hpp"

namespace kilnloop {
namespace {

constexpr std::string_view kModelFormat = "kilnloop-model";
constexpr int kModelVersion = 1;

[[noreturn]] void bad_hyperparams(const std::string& why) {
  throw Error(ErrorCode::InvalidHyperparams, why);
}

std::size_t minimum_records(Algorithm a) { return a == Algorithm::MLP ? 2 : 1; }

std::vector<std::size_t> all_rows(std::size_t n) {
  std::vector<std::size_t> rows(n);
  std::iota(rows.begin(), rows.end(), 0);
  return rows;
}

RegressionTree fit_dt(const FeatureView& x, std::span<const double> y, const DtParams& p,
                      std::uint64_t seed) {
  Rng rng(derive_seed(seed, 0));
  const auto rows = all_rows(x.rows);
  return RegressionTree::fit(x, y, rows, {p.max_depth, p.min_samples_split, 0}, &rng);
}

ForestModel fit_rf(const FeatureView& x, std::span<const double> y, const RfParams& p,
                   std::uint64_t seed) {
  const std::size_t max_features =
      p.max_features > 0 ? static_cast<std::size_t>(p.max_features) : (x.cols + 2) / 3;
  const TreeParams tree_params{p.max_depth, p.min_samples_split, max_features};
  ForestModel forest;
  forest.trees.reserve(static_cast<std::size_t>(p.n_trees));
  std::vector<std::size_t> rows(x.rows);
  for (int t = 0; t < p.n_trees; ++t) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
    if (p.bootstrap) {
      for (auto& r : rows) r = rng.index(x.rows);
    } else {
      std::iota(rows.begin(), rows.end(), 0);
    }
    forest.trees.push_back(RegressionTree::fit(x, y, rows, tree_params, &rng));
  }
  return forest;
}

GbmModel fit_gbm(const FeatureView& x, std::span<const double> y, const GbmHyperParams& p,
                 std::uint64_t seed) {
  const std::size_t n = x.rows;
  GbmModel model;
  model.learning_rate = p.learning_rate;
  model.initial = std::accumulate(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(n), 0.0) /
                  static_cast<double>(n);
  std::vector<double> fitted(n, model.initial), residual(n);
  const TreeParams tree_params{p.max_depth, p.min_samples_split, 0};
  const std::size_t draw = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::llround(p.subsample * static_cast<double>(n))), 1, n);
  std::vector<std::size_t> pool = all_rows(n);
  std::vector<std::size_t> rows;
  model.trees.reserve(static_cast<std::size_t>(p.n_estimators));
  for (int m = 0; m < p.n_estimators; ++m) {
    for (std::size_t i = 0; i < n; ++i) residual[i] = y[i] - fitted[i];
    if (draw == n) {
      rows = pool;
    } else {
      // Partial Fisher-Yates: the first `draw` slots form the subsample.
      Rng rng(derive_seed(seed, static_cast<std::uint64_t>(m)));
      std::iota(pool.begin(), pool.end(), 0);
      for (std::size_t i = 0; i < draw; ++i) std::swap(pool[i], pool[i + rng.index(n - i)]);
      rows.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(draw));
      std::sort(rows.begin(), rows.end());
    }
    model.trees.push_back(RegressionTree::fit(x, residual, rows, tree_params, nullptr));
    const auto& tree = model.trees.back();
    for (std::size_t i = 0; i < n; ++i) fitted[i] += p.learning_rate * tree.predict(x.row(i));
  }
  return model;
}

FittedState fit_state(const ModelSpec& spec, const FeatureView& x, std::span<const double> y) {
  if (x.rows < minimum_records(spec.algorithm))
    throw Error(ErrorCode::InsufficientData,
                std::string(to_string(spec.algorithm)) + " needs at least " +
                    std::to_string(minimum_records(spec.algorithm)) + " record(s) with capacity");
  switch (spec.algorithm) {
    case Algorithm::DT: return fit_dt(x, y, std::get<DtParams>(spec.hyperparams), spec.seed);
    case Algorithm::RF: return fit_rf(x, y, std::get<RfParams>(spec.hyperparams), spec.seed);
    case Algorithm::GBM: return fit_gbm(x, y, std::get<GbmHyperParams>(spec.hyperparams), spec.seed);
    case Algorithm::MLP: return MlpModel::fit(x, y, std::get<MlpParams>(spec.hyperparams), spec.seed);
  }
  bad_hyperparams("unknown algorithm");
}

double predict_state(const FittedState& state, const double* features) {
  return std::visit([&](const auto& m) { return m.predict(features); }, state);
}

MetricsRow evaluate(const FittedState& state, const FeatureView& x, std::span<const double> y) {
  std::vector<double> pred(x.rows);
  for (std::size_t i = 0; i < x.rows; ++i) pred[i] = predict_state(state, x.row(i));
  return compute_metrics(pred, y.subspan(0, x.rows));
}

nlohmann::ordered_json trees_to_json(const std::vector<RegressionTree>& trees) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& t : trees) arr.push_back(t.to_json());
  return arr;
}

std::vector<RegressionTree> trees_from_json(const nlohmann::json& j) {
  std::vector<RegressionTree> trees;
  for (const auto& t : j) trees.push_back(RegressionTree::from_json(t));
  return trees;
}

void check_tree_features(const RegressionTree& tree, std::size_t feature_count) {
  for (const auto& node : tree.nodes())
    if (node.feature >= static_cast<int>(feature_count))
      throw Error(ErrorCode::ParseError, "tree references a feature outside the space encoding");
}

}  // namespace

std::string_view to_string(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::DT: return "DT";
    case Algorithm::RF: return "RF";
    case Algorithm::GBM: return "GBM";
    case Algorithm::MLP: return "MLP";
  }
  return "GBM";
}

std::optional<Algorithm> parse_algorithm(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "dt") return Algorithm::DT;
  if (lower == "rf") return Algorithm::RF;
  if (lower == "gbm") return Algorithm::GBM;
  if (lower == "mlp" || lower == "nn") return Algorithm::MLP;
  return std::nullopt;
}

bool within_search_ranges(const GbmHyperParams& p) {
  using R = SearchRanges;
  return p.subsample >= R::kSubsampleMin && p.subsample <= R::kSubsampleMax &&
         p.n_estimators >= R::kEstimatorsMin && p.n_estimators <= R::kEstimatorsMax &&
         p.max_depth >= R::kDepthMin && p.max_depth <= R::kDepthMax &&
         p.learning_rate >= R::kLearningRateMin && p.learning_rate <= R::kLearningRateMax &&
         p.min_samples_split >= R::kMinSplitMin && p.min_samples_split <= R::kMinSplitMax;
}

GbmHyperParams sample_gbm(Rng& rng) {
  using R = SearchRanges;
  GbmHyperParams p;
  p.subsample = rng.uniform(R::kSubsampleMin, R::kSubsampleMax);
  p.n_estimators = static_cast<int>(rng.uniform_int(R::kEstimatorsMin, R::kEstimatorsMax));
  p.max_depth = static_cast<int>(rng.uniform_int(R::kDepthMin, R::kDepthMax));
  const double lo = std::log(R::kLearningRateMin), hi = std::log(R::kLearningRateMax);
  p.learning_rate = std::clamp(std::exp(rng.uniform(lo, hi)), R::kLearningRateMin, R::kLearningRateMax);
  p.min_samples_split = static_cast<int>(rng.uniform_int(R::kMinSplitMin, R::kMinSplitMax));
  return p;
}

DtParams sample_dt(Rng& rng) {
  using R = SearchRanges;
  DtParams p;
  p.max_depth = static_cast<int>(rng.uniform_int(R::kDepthMin, R::kDepthMax));
  p.min_samples_split = static_cast<int>(rng.uniform_int(R::kMinSplitMin, R::kMinSplitMax));
  return p;
}

RfParams sample_rf(Rng& rng) {
  using R = SearchRanges;
  RfParams p;
  p.n_trees = static_cast<int>(rng.uniform_int(R::kEstimatorsMin, R::kEstimatorsMax));
  p.max_depth = static_cast<int>(rng.uniform_int(R::kDepthMin, R::kDepthMax));
  p.min_samples_split = static_cast<int>(rng.uniform_int(R::kMinSplitMin, R::kMinSplitMax));
  return p;
}

ModelSpec ModelSpec::defaults(Algorithm algorithm, std::uint64_t seed) {
  ModelSpec spec;
  spec.algorithm = algorithm;
  spec.seed = seed;
  switch (algorithm) {
    case Algorithm::DT: spec.hyperparams = DtParams{}; break;
    case Algorithm::RF: spec.hyperparams = RfParams{}; break;
    case Algorithm::GBM: spec.hyperparams = GbmHyperParams{}; break;
    case Algorithm::MLP: spec.hyperparams = MlpParams{}; break;
  }
  return spec;
}

void ModelSpec::validate() const {
  const bool kind_ok = (algorithm == Algorithm::DT && std::holds_alternative<DtParams>(hyperparams)) ||
                       (algorithm == Algorithm::RF && std::holds_alternative<RfParams>(hyperparams)) ||
                       (algorithm == Algorithm::GBM && std::holds_alternative<GbmHyperParams>(hyperparams)) ||
                       (algorithm == Algorithm::MLP && std::holds_alternative<MlpParams>(hyperparams));
  if (!kind_ok) bad_hyperparams("hyperparameter kind does not match " + std::string(to_string(algorithm)));
  if (const auto* p = std::get_if<DtParams>(&hyperparams)) {
    if (p->max_depth < 0) bad_hyperparams("max_depth must be >= 0");
    if (p->min_samples_split < 2) bad_hyperparams("min_samples_split must be >= 2");
  } else if (const auto* p = std::get_if<RfParams>(&hyperparams)) {
    if (p->n_trees < 1) bad_hyperparams("n_trees must be >= 1");
    if (p->max_depth < 0) bad_hyperparams("max_depth must be >= 0");
    if (p->min_samples_split < 2) bad_hyperparams("min_samples_split must be >= 2");
    if (p->max_features < 0) bad_hyperparams("max_features must be >= 0");
  } else if (const auto* p = std::get_if<GbmHyperParams>(&hyperparams)) {
    if (!(p->subsample > 0.0 && p->subsample <= 1.0)) bad_hyperparams("subsample must lie in (0, 1]");
    if (p->n_estimators < 1) bad_hyperparams("n_estimators must be >= 1");
    if (p->max_depth < 1) bad_hyperparams("max_depth must be >= 1");
    if (!(p->learning_rate > 0.0 && p->learning_rate <= 1.0))
      bad_hyperparams("learning_rate must lie in (0, 1]");
    if (p->min_samples_split < 2) bad_hyperparams("min_samples_split must be >= 2");
  } else {
    const auto& m = std::get<MlpParams>(hyperparams);
    if (m.hidden_units < 1 || m.epochs < 1 || m.batch_size < 1 || !(m.learning_rate > 0.0) ||
        !(m.momentum >= 0.0 && m.momentum < 1.0))
      bad_hyperparams("MLP hyperparameters out of range");
  }
}

nlohmann::ordered_json ModelSpec::to_json() const {
  nlohmann::ordered_json h;
  if (const auto* p = std::get_if<DtParams>(&hyperparams)) {
    h["max_depth"] = p->max_depth;
    h["min_samples_split"] = p->min_samples_split;
  } else if (const auto* p = std::get_if<RfParams>(&hyperparams)) {
    h["n_trees"] = p->n_trees;
    h["max_depth"] = p->max_depth;
    h["min_samples_split"] = p->min_samples_split;
    h["max_features"] = p->max_features;
    h["bootstrap"] = p->bootstrap;
  } else if (const auto* p = std::get_if<GbmHyperParams>(&hyperparams)) {
    h["subsample"] = p->subsample;
    h["n_estimators"] = p->n_estimators;
    h["max_depth"] = p->max_depth;
    h["learning_rate"] = p->learning_rate;
    h["min_samples_split"] = p->min_samples_split;
  } else {
    const auto& m = std::get<MlpParams>(hyperparams);
    h["hidden_units"] = m.hidden_units;
    h["epochs"] = m.epochs;
    h["batch_size"] = m.batch_size;
    h["learning_rate"] = m.learning_rate;
    h["momentum"] = m.momentum;
  }
  nlohmann::ordered_json j;
  j["algorithm"] = to_string(algorithm);
  j["seed"] = seed;
  j["hyperparams"] = std::move(h);
  return j;
}

ModelSpec ModelSpec::from_json(const nlohmann::json& j) {
  ModelSpec spec;
  try {
    auto algo = parse_algorithm(j.at("algorithm").get<std::string>());
    if (!algo) bad_hyperparams("unknown algorithm " + j.at("algorithm").dump());
    spec = defaults(*algo, j.value("seed", std::uint64_t{0}));
    const nlohmann::json h = j.value("hyperparams", nlohmann::json::object());
    switch (*algo) {
      case Algorithm::DT: {
        DtParams p;
        p.max_depth = h.value("max_depth", p.max_depth);
        p.min_samples_split = h.value("min_samples_split", p.min_samples_split);
        spec.hyperparams = p;
        break;
      }
      case Algorithm::RF: {
        RfParams p;
        p.n_trees = h.value("n_trees", p.n_trees);
        p.max_depth = h.value("max_depth", p.max_depth);
        p.min_samples_split = h.value("min_samples_split", p.min_samples_split);
        p.max_features = h.value("max_features", p.max_features);
        p.bootstrap = h.value("bootstrap", p.bootstrap);
        spec.hyperparams = p;
        break;
      }
      case Algorithm::GBM: {
        GbmHyperParams p;
        p.subsample = h.value("subsample", p.subsample);
        p.n_estimators = h.value("n_estimators", p.n_estimators);
        p.max_depth = h.value("max_depth", p.max_depth);
        p.learning_rate = h.value("learning_rate", p.learning_rate);
        p.min_samples_split = h.value("min_samples_split", p.min_samples_split);
        spec.hyperparams = p;
        break;
      }
      case Algorithm::MLP: {
        MlpParams p;
        p.hidden_units = h.value("hidden_units", p.hidden_units);
        p.epochs = h.value("epochs", p.epochs);
        p.batch_size = h.value("batch_size", p.batch_size);
        p.learning_rate = h.value("learning_rate", p.learning_rate);
        p.momentum = h.value("momentum", p.momentum);
        spec.hyperparams = p;
        break;
      }
    }
  } catch (const nlohmann::json::exception& e) {
    bad_hyperparams(std::string("model spec: ") + e.what());
  }
  spec.validate();
  return spec;
}

double ForestModel::predict(const double* x) const {
  double total = 0.0;
  for (const auto& t : trees) total += t.predict(x);
  return total / static_cast<double>(trees.size());
}

double GbmModel::predict(const double* x) const {
  double f = initial;
  for (const auto& t : trees) f += learning_rate * t.predict(x);
  return f;
}

TrainedModel::TrainedModel(ModelSpec spec, DesignSpace space, FittedState state, MetricsRow training)
    : spec_(std::move(spec)), space_(std::move(space)), state_(std::move(state)), training_(training) {}

double TrainedModel::predict_features(const double* features) const {
  return predict_state(state_, features);
}

nlohmann::ordered_json TrainedModel::to_json() const {
  nlohmann::ordered_json state;
  if (const auto* t = std::get_if<RegressionTree>(&state_)) {
    state["tree"] = t->to_json();
  } else if (const auto* f = std::get_if<ForestModel>(&state_)) {
    state["trees"] = trees_to_json(f->trees);
  } else if (const auto* g = std::get_if<GbmModel>(&state_)) {
    state["initial"] = g->initial;
    state["learning_rate"] = g->learning_rate;
    state["trees"] = trees_to_json(g->trees);
  } else {
    state["mlp"] = std::get<MlpModel>(state_).to_json();
  }
  nlohmann::ordered_json j;
  j["format"] = kModelFormat;
  j["version"] = kModelVersion;
  j["space"] = space_.to_json();
  j["feature_names"] = space_.feature_names();
  j["spec"] = spec_.to_json();
  j["training_metrics"] = training_.to_json();
  j["state"] = std::move(state);
  return j;
}

TrainedModel TrainedModel::from_json(const nlohmann::json& j) {
  try {
    if (j.value("format", std::string()) != kModelFormat)
      throw Error(ErrorCode::ParseError, "not a model artifact");
    if (j.at("version").get<int>() != kModelVersion)
      throw Error(ErrorCode::ParseError, "unsupported model artifact version");
    DesignSpace space = DesignSpace::from_json(j.at("space"));
    ModelSpec spec = ModelSpec::from_json(j.at("spec"));
    const auto& s = j.at("state");
    FittedState state;
    switch (spec.algorithm) {
      case Algorithm::DT: state = RegressionTree::from_json(s.at("tree")); break;
      case Algorithm::RF: state = ForestModel{trees_from_json(s.at("trees"))}; break;
      case Algorithm::GBM:
        state = GbmModel{s.at("initial").get<double>(), s.at("learning_rate").get<double>(),
                         trees_from_json(s.at("trees"))};
        break;
      case Algorithm::MLP: state = MlpModel::from_json(s.at("mlp")); break;
    }
    const std::size_t fc = space.feature_count();
    if (const auto* t = std::get_if<RegressionTree>(&state)) check_tree_features(*t, fc);
    if (const auto* f = std::get_if<ForestModel>(&state)) {
      if (f->trees.empty()) throw Error(ErrorCode::ParseError, "forest without trees");
      for (const auto& t : f->trees) check_tree_features(t, fc);
    }
    if (const auto* g = std::get_if<GbmModel>(&state))
      for (const auto& t : g->trees) check_tree_features(t, fc);
    if (const auto* m = std::get_if<MlpModel>(&state); m && m->shape().inputs != fc)
      throw Error(ErrorCode::ParseError, "MLP input width does not match the space encoding");
    return TrainedModel(std::move(spec), std::move(space), std::move(state),
                        MetricsRow::from_json(j.at("training_metrics")));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("model artifact: ") + e.what());
  }
}

void TrainedModel::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
  out << to_json().dump(1) << '\n';
  if (!out) throw Error(ErrorCode::Io, "failed writing " + path);
}

TrainedModel TrainedModel::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, path + ": " + e.what());
  }
}

TrainedModel train(const ModelSpec& spec, const Dataset& data) {
  spec.validate();
  const TrainingMatrix m = training_matrix(data);
  const FeatureView x{m.x.data(), m.rows, m.cols};
  FittedState state = fit_state(spec, x, m.y);
  const MetricsRow metrics = evaluate(state, x, m.y);
  return TrainedModel(spec, data.space, std::move(state), metrics);
}

std::vector<double> predict(const TrainedModel& model, const std::vector<DesignPoint>& points) {
  std::vector<double> out;
  out.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto check = validate_point(model.space(), points[i]);
    if (!check.ok())
      throw Error(ErrorCode::SpaceMismatch, "point " + std::to_string(i) + " is not in space '" +
                                                model.space().name() + "': " + check.describe());
    const auto f = encode_features(model.space(), points[i]);
    out.push_back(model.predict_features(f.data()));
  }
  return out;
}

std::vector<std::vector<std::size_t>> kfold_partition(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw Error(ErrorCode::InvalidConfig, "k-fold needs k >= 2");
  if (n < k)
    throw Error(ErrorCode::InsufficientData,
                std::to_string(k) + "-fold cross-validation needs at least " + std::to_string(k) +
                    " records with capacity, found " + std::to_string(n));
  std::vector<std::size_t> order = all_rows(n);
  Rng rng(seed);
  rng.shuffle(order);
  std::vector<std::vector<std::size_t>> folds(k);
  const std::size_t base = n / k, extra = n % k;
  std::size_t pos = 0;
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t size = base + (f < extra ? 1 : 0);
    folds[f].assign(order.begin() + static_cast<std::ptrdiff_t>(pos),
                    order.begin() + static_cast<std::ptrdiff_t>(pos + size));
    pos += size;
  }
  return folds;
}

CvResult kfold_cv(const ModelSpec& spec, const Dataset& data, std::size_t k, std::uint64_t seed) {
  spec.validate();
  const Dataset bearing = data.capacity_bearing();
  const TrainingMatrix m = training_matrix(bearing);
  const auto folds = kfold_partition(m.rows, k, seed);

  CvResult result;
  std::vector<char> held(m.rows);
  std::vector<double> tx, ty, pred, actual;
  for (const auto& fold : folds) {
    std::fill(held.begin(), held.end(), 0);
    for (auto i : fold) held[i] = 1;
    tx.clear();
    ty.clear();
    for (std::size_t i = 0; i < m.rows; ++i) {
      if (held[i]) continue;
      tx.insert(tx.end(), m.row(i), m.row(i) + m.cols);
      ty.push_back(m.y[i]);
    }
    const FeatureView train_view{tx.data(), ty.size(), m.cols};
    const FittedState state = fit_state(spec, train_view, ty);
    pred.clear();
    actual.clear();
    std::vector<std::string> ids;
    for (auto i : fold) {
      pred.push_back(predict_state(state, m.row(i)));
      actual.push_back(m.y[i]);
      ids.push_back(bearing.records[i].id);
    }
    result.folds.push_back(compute_metrics(pred, actual));
    result.fold_ids.push_back(std::move(ids));
  }
  result.mean = mean_metrics(result.folds);
  return result;
}

ModelSpec sample_trial_spec(Algorithm algorithm, std::uint64_t seed, std::size_t trial) {
  Rng rng(derive_seed(seed, trial));
  ModelSpec spec = ModelSpec::defaults(algorithm, derive_seed(seed, 0x5eed0000ULL + trial));
  switch (algorithm) {
    case Algorithm::DT: spec.hyperparams = sample_dt(rng); break;
    case Algorithm::RF: spec.hyperparams = sample_rf(rng); break;
    case Algorithm::GBM: spec.hyperparams = sample_gbm(rng); break;
    case Algorithm::MLP: break;
  }
  return spec;
}

SearchResult random_search(Algorithm algorithm, const Dataset& data, std::size_t n_trials,
                           std::uint64_t seed, std::size_t k) {
  if (n_trials < 1) throw Error(ErrorCode::InvalidConfig, "random search needs at least one trial");
  // The MLP keeps fixed defaults, so a single evaluation is the whole search.
  const std::size_t trials = algorithm == Algorithm::MLP ? 1 : n_trials;
  SearchResult result;
  for (std::size_t t = 0; t < trials; ++t) {
    ModelSpec spec = sample_trial_spec(algorithm, seed, t);
    const CvResult cv = kfold_cv(spec, data, k, seed);
    result.trials.push_back({spec, cv.mean.rmse});
    if (t == 0 || cv.mean.rmse < result.trials[result.best_index].mean_rmse) result.best_index = t;
  }
  result.best = result.trials[result.best_index].spec;
  return result;
}

std::string trial_log_csv(const SearchResult& result) {
  std::string out = csv::format_row({"trial", "algorithm", "mean_cv_rmse", "seed", "hyperparams", "best"});
  for (std::size_t i = 0; i < result.trials.size(); ++i) {
    const auto& t = result.trials[i];
    out += csv::format_row({std::to_string(i), std::string(to_string(t.spec.algorithm)),
                            format_number(t.mean_rmse), std::to_string(t.spec.seed),
                            t.spec.to_json()["hyperparams"].dump(), i == result.best_index ? "1" : "0"});
  }
  return out;
}

}  // namespace kilnloop
