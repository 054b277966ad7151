#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>

#include "json.hpp"
#include "kilnloop/dataset.hpp"
#include "kilnloop/design_space.hpp"

namespace kilnloop::lab {

// Synthetic stand-in for the synthesis lab. The capacity surface
//
//   f(p) = -110 + 360 ni - 0.002 (T_cal - (1650 - 1000 ni))^2 - 0.001 (T_coat - 290)^2
//          + 1200 d_Zr - 120000 d_Zr^2 + 1000 d_Nb - 100000 d_Nb^2
//
// and every coefficient, grid and sampler weight below are invented for
// desk-scale testing. They are not chemistry.

inline constexpr std::string_view kNi = "ni_fraction";
inline constexpr std::string_view kCalcination = "calcination_temp_C";
inline constexpr std::string_view kCoating = "coating_temp_C";
inline constexpr std::string_view kZr = "d_zr_wtfrac";
inline constexpr std::string_view kNb = "d_nb_wtfrac";
inline constexpr std::string_view kAtmosphere = "atmosphere";

/// ni 0.90..0.94 step 0.02, T_cal 650..780 step 5, T_coat 250..470 step 10,
/// d_Zr 0..0.01 step 0.0005, d_Nb fixed 0.002, atmosphere fixed "Air".
DesignSpace benchmark_space();

struct OracleConfig {
  DesignSpace space = benchmark_space();
  double noise_sigma = 1.0;
  double censor_threshold = 210.0;
  double censor_probability = 0.7;
  std::uint64_t seed = 0;

  /// Throws Error(InvalidConfig).
  void validate() const;

  nlohmann::ordered_json to_json() const;
  static OracleConfig from_json(const nlohmann::json& j);
  static OracleConfig load(const std::string& path);
};

/// The noiseless surface. Throws Error(InvalidPoint) if a term is missing.
double true_capacity(const DesignPoint& point);

/// One synthetic experiment, deterministic per (config, point, draw_seed).
/// Below the censor threshold the outcome is dropped (status partial) with
/// the configured probability. The returned record has an empty id.
ExperimentRecord measure(const OracleConfig& config, const DesignPoint& point, std::uint64_t draw_seed);

/// Exact grid argmax of the surface.
std::pair<DesignPoint, double> true_optimum(const OracleConfig& config);

/// Biased historical archive: ni mostly 0.92, calcination near-Gaussian
/// around 730, coating mostly fixed at 430, d_Zr only on its lower half.
Dataset generate_history(const OracleConfig& config, std::size_t n, std::uint64_t gen_seed);

}  // namespace kilnloop::lab
