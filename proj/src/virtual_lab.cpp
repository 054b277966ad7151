#include "kilnloop/virtual_lab.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "kilnloop/error.hpp"
#include "kilnloop/rng.hpp"

namespace kilnloop::lab {
namespace {

double number(const DesignPoint& point, std::string_view name) {
  auto it = point.values.find(std::string(name));
  if (it == point.values.end()) throw Error(ErrorCode::InvalidPoint, "missing " + std::string(name));
  const auto* x = std::get_if<double>(&it->second);
  if (!x) throw Error(ErrorCode::InvalidPoint, std::string(name) + " must be numeric");
  return *x;
}

}  // namespace

DesignSpace benchmark_space() {
  return DesignSpace("ncm-benchmark", 1,
                     {
                         {std::string(kNi), Continuous{0.90, 0.94, 0.02, "fraction"}},
                         {std::string(kCalcination), Continuous{650.0, 780.0, 5.0, "C"}},
                         {std::string(kCoating), Continuous{250.0, 470.0, 10.0, "C"}},
                         {std::string(kZr), Continuous{0.0, 0.01, 0.0005, "wt fraction"}},
                         {std::string(kNb), Fixed{0.002}},
                         {std::string(kAtmosphere), Fixed{std::string("Air")}},
                     });
}

void OracleConfig::validate() const {
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma))
    throw Error(ErrorCode::InvalidConfig, "noise_sigma must be finite and >= 0");
  if (!std::isfinite(censor_threshold)) throw Error(ErrorCode::InvalidConfig, "censor_threshold must be finite");
  if (!(censor_probability >= 0.0 && censor_probability <= 1.0))
    throw Error(ErrorCode::InvalidConfig, "censor_probability must lie in [0, 1]");
}

nlohmann::ordered_json OracleConfig::to_json() const {
  nlohmann::ordered_json j;
  j["noise_sigma"] = noise_sigma;
  j["censor_threshold"] = censor_threshold;
  j["censor_probability"] = censor_probability;
  j["seed"] = seed;
  j["space"] = space.to_json();
  return j;
}

OracleConfig OracleConfig::from_json(const nlohmann::json& j) {
  OracleConfig c;
  try {
    for (const auto& [key, _] : j.items())
      if (key != "noise_sigma" && key != "censor_threshold" && key != "censor_probability" && key != "seed" &&
          key != "space")
        throw Error(ErrorCode::InvalidConfig, "oracle: unknown field '" + key + "'");
    c.noise_sigma = j.value("noise_sigma", c.noise_sigma);
    c.censor_threshold = j.value("censor_threshold", c.censor_threshold);
    c.censor_probability = j.value("censor_probability", c.censor_probability);
    c.seed = j.value("seed", c.seed);
    if (j.contains("space")) c.space = DesignSpace::from_json(j.at("space"));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("oracle: ") + e.what());
  }
  c.validate();
  return c;
}

OracleConfig OracleConfig::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ParseError, path + ": " + e.what());
  }
}

double true_capacity(const DesignPoint& point) {
  const double ni = number(point, kNi);
  const double t_cal = number(point, kCalcination);
  const double t_coat = number(point, kCoating);
  const double zr = number(point, kZr);
  const double nb = number(point, kNb);
  const double cal_dev = t_cal - (1650.0 - 1000.0 * ni);
  const double coat_dev = t_coat - 290.0;
  return -110.0 + 360.0 * ni - 0.002 * cal_dev * cal_dev - 0.001 * coat_dev * coat_dev + 1200.0 * zr -
         120000.0 * zr * zr + 1000.0 * nb - 100000.0 * nb * nb;
}

ExperimentRecord measure(const OracleConfig& config, const DesignPoint& point, std::uint64_t draw_seed) {
  const auto check = validate_point(config.space, point);
  if (!check.ok()) throw Error(ErrorCode::InvalidPoint, check.describe());
  Rng rng(derive_seed(config.seed, draw_seed));
  const double noise = rng.normal();
  const double censor_draw = rng.uniform();
  const double capacity = true_capacity(point) + config.noise_sigma * noise;

  ExperimentRecord record;
  record.point = point;
  if (capacity < config.censor_threshold && censor_draw < config.censor_probability) {
    record.status = Status::Partial;
  } else {
    record.status = Status::Complete;
    record.discharge_capacity = capacity;
  }
  return record;
}

std::pair<DesignPoint, double> true_optimum(const OracleConfig& config) {
  const DesignSpace& space = config.space;
  const std::uint64_t total = space.cardinality();
  std::uint64_t best_key = 0;
  double best = -std::numeric_limits<double>::infinity();
  for (std::uint64_t key = 0; key < total; ++key) {
    const double value = true_capacity(space.point_at(space.from_linear_key(key)));
    if (value > best) {
      best = value;
      best_key = key;
    }
  }
  return {space.point_at(space.from_linear_key(best_key)), best};
}

Dataset generate_history(const OracleConfig& config, std::size_t n, std::uint64_t gen_seed) {
  const DesignSpace& space = config.space;
  const std::size_t ni_i = *space.find(kNi), cal_i = *space.find(kCalcination), coat_i = *space.find(kCoating),
                    zr_i = *space.find(kZr);
  const auto& params = space.parameters();
  const auto& cal = std::get<Continuous>(params[cal_i].kind);
  const auto& ni_spec = std::get<Continuous>(params[ni_i].kind);
  const std::size_t coat_levels = params[coat_i].cardinality();
  const std::size_t zr_levels = params[zr_i].cardinality();

  Dataset data{space, {}};
  data.records.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng(derive_seed(gen_seed, i));
    GridIndex index(space.size(), 0);
    index[ni_i] = snap_index(ni_spec, rng.bernoulli(0.95) ? 0.92 : 0.94);
    index[cal_i] = snap_index(cal, 730.0 + 15.0 * rng.normal());
    index[coat_i] = rng.bernoulli(0.8) ? snap_index(std::get<Continuous>(params[coat_i].kind), 430.0)
                                        : rng.index(coat_levels);
    index[zr_i] = rng.index(zr_levels / 2 + 1);
    ExperimentRecord record = measure(config, space.point_at(index), derive_seed(gen_seed ^ 0x6c6162ULL, i));
    char id[32];
    std::snprintf(id, sizeof id, "H%04zu", i + 1);
    record.id = id;
    data.records.push_back(std::move(record));
  }
  return data;
}

}  // namespace kilnloop::lab
