#include "kilnloop/pso.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "kilnloop/csv.hpp"
#include "kilnloop/error.hpp"
#include "kilnloop/kernels.hpp"
#include "kilnloop/rng.hpp"

namespace kilnloop {
namespace {

// One swarm dimension per non-fixed parameter.
struct Dimension {
  std::size_t parameter;
  const Continuous* continuous;  // null for categorical (level index axis)
  double lower;
  double upper;
};

std::size_t round_level(double x, std::size_t levels) {
  if (!(x > 0.0)) return 0;
  const double lower = std::floor(x);
  std::size_t k = static_cast<std::size_t>(lower) + (x - lower > 0.5 + 1e-9 ? 1 : 0);
  return std::min(k, levels - 1);
}

void check_space(const TrainedModel& model, const DesignSpace& space) {
  if (!(model.space() == space))
    throw Error(ErrorCode::SpaceMismatch, "model was trained on space '" + model.space().name() +
                                              "', not '" + space.name() + "'");
}

struct Ranked {
  std::uint64_t key;
  double value;
};

bool better(const Ranked& a, const Ranked& b) {
  if (a.value != b.value) return a.value > b.value;
  return a.key < b.key;
}

std::vector<Candidate> to_candidates(const DesignSpace& space, std::vector<Ranked>& ranked, std::size_t k) {
  const std::size_t take = std::min(k, ranked.size());
  std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(take), ranked.end(), better);
  std::vector<Candidate> out;
  for (std::size_t i = 0; i < take; ++i)
    out.push_back({space.point_at(space.from_linear_key(ranked[i].key)), ranked[i].value, static_cast<int>(i + 1)});
  return out;
}

}  // namespace

void PsoConfig::validate() const {
  auto fail = [](const std::string& why) { throw Error(ErrorCode::InvalidConfig, "pso: " + why); };
  if (n_particles < 1) fail("n_particles must be >= 1");
  if (n_iterations < 1) fail("n_iterations must be >= 1");
  if (!(inertia > 0.0 && inertia < 1.0)) fail("inertia must lie in (0, 1)");
  if (!(cognitive > 0.0) || !(social > 0.0)) fail("cognitive and social must be > 0");
  if (!(v_max_fraction > 0.0 && v_max_fraction <= 1.0)) fail("v_max_fraction must lie in (0, 1]");
}

nlohmann::ordered_json PsoConfig::to_json() const {
  nlohmann::ordered_json j;
  j["n_particles"] = n_particles;
  j["n_iterations"] = n_iterations;
  j["inertia"] = inertia;
  j["cognitive"] = cognitive;
  j["social"] = social;
  j["v_max_fraction"] = v_max_fraction;
  j["seed"] = seed;
  return j;
}

PsoConfig PsoConfig::from_json(const nlohmann::json& j) {
  PsoConfig c;
  try {
    for (const auto& [key, _] : j.items()) {
      static const std::vector<std::string> known{"n_particles", "n_iterations", "inertia", "cognitive",
                                                  "social",      "v_max_fraction", "seed"};
      if (std::find(known.begin(), known.end(), key) == known.end())
        throw Error(ErrorCode::InvalidConfig, "pso: unknown field '" + key + "'");
    }
    c.n_particles = j.value("n_particles", c.n_particles);
    c.n_iterations = j.value("n_iterations", c.n_iterations);
    c.inertia = j.value("inertia", c.inertia);
    c.cognitive = j.value("cognitive", c.cognitive);
    c.social = j.value("social", c.social);
    c.v_max_fraction = j.value("v_max_fraction", c.v_max_fraction);
    c.seed = j.value("seed", c.seed);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("pso: ") + e.what());
  }
  c.validate();
  return c;
}

std::vector<Candidate> optimize(const TrainedModel& model, const DesignSpace& space, const PsoConfig& config,
                                std::size_t k, const ExclusionSet& exclude, PsoStats* stats) {
  config.validate();
  check_space(model, space);
  if (k < 1) throw Error(ErrorCode::InvalidConfig, "k must be >= 1");

  std::vector<Dimension> dims;
  for (std::size_t i = 0; i < space.size(); ++i) {
    const auto& p = space.parameters()[i];
    if (const auto* c = std::get_if<Continuous>(&p.kind)) {
      dims.push_back({i, c, c->min, c->max});
    } else if (const auto* cat = std::get_if<Categorical>(&p.kind)) {
      dims.push_back({i, nullptr, 0.0, static_cast<double>(cat->levels.size() - 1)});
    }
  }
  const std::size_t d = dims.size();
  const std::size_t n = config.n_particles;
  const std::size_t len = n * d;

  std::vector<double> lower(len), upper(len), v_max(len);
  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t j = 0; j < d; ++j) {
      lower[p * d + j] = dims[j].lower;
      upper[p * d + j] = dims[j].upper;
      v_max[p * d + j] = config.v_max_fraction * (dims[j].upper - dims[j].lower);
    }

  std::unordered_map<std::uint64_t, double> archive;
  GridIndex index(space.size(), 0);
  std::vector<double> features;
  std::size_t evaluations = 0;
  auto fitness = [&](const double* x) {
    ++evaluations;
    for (std::size_t j = 0; j < d; ++j) {
      const auto& dim = dims[j];
      index[dim.parameter] = dim.continuous
                                 ? snap_index(*dim.continuous, x[j])
                                 : round_level(x[j], static_cast<std::size_t>(dim.upper) + 1);
    }
    const std::uint64_t key = space.linear_key(index);
    auto it = archive.find(key);
    if (it != archive.end()) return it->second;
    space.encode_index(index, features);
    const double value = model.predict_features(features.data());
    archive.emplace(key, value);
    return value;
  };

  std::vector<Rng> rngs;
  rngs.reserve(n);
  for (std::size_t p = 0; p < n; ++p) rngs.emplace_back(derive_seed(config.seed, p));

  std::vector<double> position(len), velocity(len), pbest(len), pbest_value(n);
  for (std::size_t p = 0; p < n; ++p) {
    for (std::size_t j = 0; j < d; ++j) position[p * d + j] = rngs[p].uniform(dims[j].lower, dims[j].upper);
    for (std::size_t j = 0; j < d; ++j) {
      const double vm = v_max[p * d + j];
      velocity[p * d + j] = rngs[p].uniform(-vm, vm);
    }
  }
  pbest = position;
  std::size_t leader = 0;
  for (std::size_t p = 0; p < n; ++p) {
    pbest_value[p] = fitness(position.data() + p * d);
    if (pbest_value[p] > pbest_value[leader]) leader = p;
  }

  std::vector<double> gbest(len), r1(len), r2(len);
  for (std::size_t it = 0; it < config.n_iterations && d > 0; ++it) {
    for (std::size_t p = 0; p < n; ++p) {
      std::copy_n(pbest.begin() + static_cast<std::ptrdiff_t>(leader * d), d,
                  gbest.begin() + static_cast<std::ptrdiff_t>(p * d));
      for (std::size_t j = 0; j < d; ++j) r1[p * d + j] = rngs[p].uniform();
      for (std::size_t j = 0; j < d; ++j) r2[p * d + j] = rngs[p].uniform();
    }
    kernels::swarm_step({velocity, position, pbest, gbest, r1, r2, v_max, lower, upper, config.inertia,
                         config.cognitive, config.social});
    for (std::size_t p = 0; p < n; ++p) {
      const double value = fitness(position.data() + p * d);
      if (value > pbest_value[p]) {
        pbest_value[p] = value;
        std::copy_n(position.begin() + static_cast<std::ptrdiff_t>(p * d), d,
                    pbest.begin() + static_cast<std::ptrdiff_t>(p * d));
      }
    }
    for (std::size_t p = 0; p < n; ++p)
      if (pbest_value[p] > pbest_value[leader]) leader = p;
  }

  if (stats) *stats = {evaluations, archive.size()};
  std::vector<Ranked> ranked;
  ranked.reserve(archive.size());
  for (const auto& [key, value] : archive)
    if (!exclude.contains(key)) ranked.push_back({key, value});
  if (ranked.empty())
    throw Error(ErrorCode::InfeasibleSpace, "every evaluated grid point is excluded");
  return to_candidates(space, ranked, k);
}

std::vector<Candidate> brute_force(const TrainedModel& model, const DesignSpace& space, std::size_t k,
                                   std::uint64_t limit, const ExclusionSet& exclude) {
  check_space(model, space);
  const std::uint64_t total = space.cardinality();
  if (total > limit)
    throw Error(ErrorCode::GridTooLarge, "grid cardinality " + std::to_string(total) + " exceeds limit " +
                                             std::to_string(limit));
  std::vector<Ranked> ranked;
  ranked.reserve(total);
  std::vector<double> features;
  for (std::uint64_t key = 0; key < total; ++key) {
    if (exclude.contains(key)) continue;
    space.encode_index(space.from_linear_key(key), features);
    ranked.push_back({key, model.predict_features(features.data())});
  }
  if (ranked.empty()) throw Error(ErrorCode::InfeasibleSpace, "every grid point is excluded");
  return to_candidates(space, ranked, k);
}

std::string candidates_csv(const DesignSpace& space, const std::vector<Candidate>& candidates, int iteration) {
  std::vector<std::string> header;
  if (iteration > 0) header.push_back("iteration");
  header.push_back("rank");
  header.push_back("predicted_capacity");
  for (const auto& p : space.parameters()) header.push_back(p.name);
  std::string out = csv::format_row(header);
  for (const auto& c : candidates) {
    std::vector<std::string> row;
    if (iteration > 0) row.push_back(std::to_string(iteration));
    row.push_back(std::to_string(c.rank));
    row.push_back(format_number(c.predicted_capacity));
    for (const auto& p : space.parameters()) row.push_back(value_to_string(c.point.values.at(p.name)));
    out += csv::format_row(row);
  }
  return out;
}

}  // namespace kilnloop
