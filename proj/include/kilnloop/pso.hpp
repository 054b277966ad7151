#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <unordered_set>
#include <vector>

#include "json.hpp"
#include "kilnloop/design_space.hpp"
#include "kilnloop/surrogate.hpp"

namespace kilnloop {

struct PsoConfig {
  std::size_t n_particles = 100;
  std::size_t n_iterations = 1000;
  double inertia = 0.729;
  double cognitive = 1.49445;
  double social = 1.49445;
  double v_max_fraction = 0.25;
  std::uint64_t seed = 0;

  /// Throws Error(InvalidConfig).
  void validate() const;

  nlohmann::ordered_json to_json() const;
  static PsoConfig from_json(const nlohmann::json& j);

  bool operator==(const PsoConfig&) const = default;
};

struct Candidate {
  DesignPoint point;
  double predicted_capacity = 0.0;
  int rank = 0;

  bool operator==(const Candidate&) const = default;
};

/// Grid points (by DesignSpace::linear_key) barred from a top-k selection.
using ExclusionSet = std::unordered_set<std::uint64_t>;

struct PsoStats {
  std::size_t evaluations = 0;      // fitness calls, including repeats
  std::size_t distinct_points = 0;  // archive size
};

/// Maximises predicted capacity over the grid. Particles move in the box of
/// free parameters (categorical levels as indices), fitness is the model's
/// prediction at the snapped point, and every evaluated point is archived.
/// Returns the archive's top-k outside `exclude`, highest first, ties by
/// lower grid key. Throws SpaceMismatch or InfeasibleSpace.
std::vector<Candidate> optimize(const TrainedModel& model, const DesignSpace& space,
                                const PsoConfig& config, std::size_t k = 10,
                                const ExclusionSet& exclude = {}, PsoStats* stats = nullptr);

/// Exhaustive top-k over the grid; ties by lexicographic point order.
std::vector<Candidate> brute_force(const TrainedModel& model, const DesignSpace& space, std::size_t k,
                                   std::uint64_t limit, const ExclusionSet& exclude = {});

/// Proposal sheet: rank, predicted_capacity, then one column per parameter.
/// A non-zero iteration prepends an `iteration` column.
std::string candidates_csv(const DesignSpace& space, const std::vector<Candidate>& candidates,
                           int iteration = 0);

}  // namespace kilnloop
