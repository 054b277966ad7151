#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"

namespace kilnloop {

/// A parameter value: numeric for continuous/fixed-numeric, text otherwise.
using Value = std::variant<double, std::string>;

struct Continuous {
  double min = 0.0;
  double max = 0.0;
  double step = 1.0;
  std::string unit;

  bool operator==(const Continuous&) const = default;
};

struct Categorical {
  std::vector<std::string> levels;

  bool operator==(const Categorical&) const = default;
};

struct Fixed {
  Value value;

  bool operator==(const Fixed&) const = default;
};

struct ParameterSpec {
  std::string name;
  std::variant<Continuous, Categorical, Fixed> kind;

  bool is_continuous() const { return std::holds_alternative<Continuous>(kind); }
  bool is_categorical() const { return std::holds_alternative<Categorical>(kind); }
  bool is_fixed() const { return std::holds_alternative<Fixed>(kind); }

  /// Number of distinct legal values (grid points, levels, or 1 for fixed).
  std::size_t cardinality() const;

  /// The k-th legal value in canonical order.
  Value grid_value(std::size_t k) const;

  bool operator==(const ParameterSpec&) const = default;
};

/// Concrete assignment of values to parameter names.
struct DesignPoint {
  std::map<std::string, Value> values;

  bool operator==(const DesignPoint&) const = default;
};

enum class Rule {
  Missing,
  UnknownParameter,
  WrongType,
  OutOfBounds,
  OffGrid,
  NotALevel,
  FixedValueMismatch,
};

std::string_view to_string(Rule rule);

struct Violation {
  std::string parameter;
  Rule rule;
};

struct ValidationResult {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  std::string describe() const;
};

/// Grid position of a point: one index per parameter in canonical order.
using GridIndex = std::vector<std::size_t>;

class DesignSpace {
 public:
  DesignSpace() = default;

  /// Throws Error(InvalidSpace) if any parameter invariant is broken.
  DesignSpace(std::string name, int version, std::vector<ParameterSpec> parameters);

  const std::string& name() const { return name_; }
  int version() const { return version_; }
  const std::vector<ParameterSpec>& parameters() const { return parameters_; }
  std::size_t size() const { return parameters_.size(); }

  /// Index of a parameter by name, or nullopt.
  std::optional<std::size_t> find(std::string_view name) const;
  const ParameterSpec& at(std::string_view name) const;

  /// Product of per-parameter cardinalities (saturates at UINT64_MAX).
  std::uint64_t cardinality() const;

  /// Length of encode_features output.
  std::size_t feature_count() const { return feature_names_.size(); }
  const std::vector<std::string>& feature_names() const { return feature_names_; }

  // Grid helpers used by the optimiser and the oracle. A GridIndex addresses
  // a valid point; its linear key orders points lexicographically in the
  // canonical parameter order.
  DesignPoint point_at(const GridIndex& index) const;
  GridIndex index_of(const DesignPoint& valid_point) const;
  std::uint64_t linear_key(const GridIndex& index) const;
  GridIndex from_linear_key(std::uint64_t key) const;
  void encode_index(const GridIndex& index, std::vector<double>& features) const;

  nlohmann::ordered_json to_json() const;
  static DesignSpace from_json(const nlohmann::json& j);
  static DesignSpace load(const std::string& path);

  bool operator==(const DesignSpace&) const = default;

 private:
  std::string name_;
  int version_ = 1;
  std::vector<ParameterSpec> parameters_;
  std::vector<std::string> feature_names_;
};

ValidationResult validate_point(const DesignSpace& space, const DesignPoint& point);

/// Nearest grid value per continuous parameter (exact midpoints go to the
/// lower value), clamped into range. Other kinds pass through.
DesignPoint snap_to_grid(const DesignSpace& space, const DesignPoint& point);

/// Grid index of a continuous value under the snapping rule.
std::size_t snap_index(const Continuous& c, double value);

/// Full Cartesian product in lexicographic canonical order.
/// Throws Error(GridTooLarge) when the cardinality exceeds limit.
std::vector<DesignPoint> enumerate_grid(const DesignSpace& space, std::uint64_t limit);

std::vector<double> encode_features(const DesignSpace& space, const DesignPoint& point);

/// Decimal text with the fewest digits that round-trips.
std::string format_number(double value);

/// Strips representation noise from min + k*step (e.g. 0.9400000000000001).
double tidy_grid_value(double value);

std::string value_to_string(const Value& value);

nlohmann::ordered_json point_to_json(const DesignSpace& space, const DesignPoint& point);
DesignPoint point_from_json(const nlohmann::json& j);

}  // namespace kilnloop
