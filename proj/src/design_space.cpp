#include "kilnloop/design_space.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "kilnloop/error.hpp"

namespace kilnloop {
namespace {

// Index-space tolerance for on-grid and bounds checks.
constexpr double kGridTolerance = 1e-7;

double grid_position(const Continuous& c, double value) { return (value - c.min) / c.step; }

std::size_t continuous_cardinality(const Continuous& c) {
  return static_cast<std::size_t>(std::llround((c.max - c.min) / c.step)) + 1;
}

bool fixed_matches(const Value& fixed, const Value& value) {
  if (fixed.index() != value.index()) return false;
  if (const auto* f = std::get_if<double>(&fixed)) {
    const double v = std::get<double>(value);
    return std::abs(v - *f) <= 1e-12 * std::max(1.0, std::abs(*f));
  }
  return std::get<std::string>(fixed) == std::get<std::string>(value);
}

void check_parameter(const ParameterSpec& p) {
  auto fail = [&](const std::string& why) {
    throw Error(ErrorCode::InvalidSpace, "parameter '" + p.name + "': " + why);
  };
  if (p.name.empty()) throw Error(ErrorCode::InvalidSpace, "parameter with empty name");
  if (const auto* c = std::get_if<Continuous>(&p.kind)) {
    if (!std::isfinite(c->min) || !std::isfinite(c->max) || !std::isfinite(c->step))
      fail("bounds must be finite");
    if (!(c->min < c->max)) fail("min must be below max");
    if (!(c->step > 0.0)) fail("step must be positive");
    const double ratio = (c->max - c->min) / c->step;
    if (std::abs(ratio - std::round(ratio)) > 1e-9 * std::max(1.0, std::abs(ratio)))
      fail("range is not an integer multiple of step");
  } else if (const auto* cat = std::get_if<Categorical>(&p.kind)) {
    if (cat->levels.empty()) fail("categorical needs at least one level");
    std::set<std::string> seen(cat->levels.begin(), cat->levels.end());
    if (seen.size() != cat->levels.size()) fail("categorical levels must be unique");
  } else {
    const auto& f = std::get<Fixed>(p.kind);
    if (const auto* v = std::get_if<double>(&f.value); v && !std::isfinite(*v))
      fail("fixed value must be finite");
  }
}

}  // namespace

std::size_t ParameterSpec::cardinality() const {
  if (const auto* c = std::get_if<Continuous>(&kind)) return continuous_cardinality(*c);
  if (const auto* cat = std::get_if<Categorical>(&kind)) return cat->levels.size();
  return 1;
}

Value ParameterSpec::grid_value(std::size_t k) const {
  if (const auto* c = std::get_if<Continuous>(&kind)) {
    const std::size_t n = continuous_cardinality(*c);
    if (k + 1 >= n) return c->max;
    return tidy_grid_value(c->min + static_cast<double>(k) * c->step);
  }
  if (const auto* cat = std::get_if<Categorical>(&kind)) return cat->levels.at(k);
  return std::get<Fixed>(kind).value;
}

std::string_view to_string(Rule rule) {
  switch (rule) {
    case Rule::Missing: return "missing";
    case Rule::UnknownParameter: return "unknown-parameter";
    case Rule::WrongType: return "wrong-type";
    case Rule::OutOfBounds: return "out-of-bounds";
    case Rule::OffGrid: return "off-grid";
    case Rule::NotALevel: return "not-a-level";
    case Rule::FixedValueMismatch: return "fixed-value mismatch";
  }
  return "unknown";
}

std::string ValidationResult::describe() const {
  std::string out;
  for (const auto& v : violations) {
    if (!out.empty()) out += "; ";
    out += v.parameter + ": " + std::string(to_string(v.rule));
  }
  return out;
}

DesignSpace::DesignSpace(std::string name, int version, std::vector<ParameterSpec> parameters)
    : name_(std::move(name)), version_(version), parameters_(std::move(parameters)) {
  std::set<std::string> names;
  for (const auto& p : parameters_) {
    check_parameter(p);
    if (!names.insert(p.name).second)
      throw Error(ErrorCode::InvalidSpace, "duplicate parameter name '" + p.name + "'");
  }
  for (const auto& p : parameters_) {
    if (const auto* cat = std::get_if<Categorical>(&p.kind)) {
      for (const auto& level : cat->levels) feature_names_.push_back(p.name + "=" + level);
    } else if (const auto* f = std::get_if<Fixed>(&p.kind)) {
      if (std::holds_alternative<double>(f->value)) feature_names_.push_back(p.name);
    } else {
      feature_names_.push_back(p.name);
    }
  }
}

std::optional<std::size_t> DesignSpace::find(std::string_view name) const {
  for (std::size_t i = 0; i < parameters_.size(); ++i)
    if (parameters_[i].name == name) return i;
  return std::nullopt;
}

const ParameterSpec& DesignSpace::at(std::string_view name) const {
  auto i = find(name);
  if (!i) throw Error(ErrorCode::UnknownParameter, std::string(name));
  return parameters_[*i];
}

std::uint64_t DesignSpace::cardinality() const {
  std::uint64_t total = 1;
  for (const auto& p : parameters_) {
    const std::uint64_t c = p.cardinality();
    if (c != 0 && total > std::numeric_limits<std::uint64_t>::max() / c)
      return std::numeric_limits<std::uint64_t>::max();
    total *= c;
  }
  return total;
}

DesignPoint DesignSpace::point_at(const GridIndex& index) const {
  DesignPoint point;
  for (std::size_t i = 0; i < parameters_.size(); ++i)
    point.values.emplace(parameters_[i].name, parameters_[i].grid_value(index[i]));
  return point;
}

GridIndex DesignSpace::index_of(const DesignPoint& point) const {
  GridIndex index(parameters_.size(), 0);
  for (std::size_t i = 0; i < parameters_.size(); ++i) {
    const auto& p = parameters_[i];
    auto it = point.values.find(p.name);
    if (it == point.values.end()) throw Error(ErrorCode::InvalidPoint, "missing " + p.name);
    if (const auto* c = std::get_if<Continuous>(&p.kind)) {
      index[i] = snap_index(*c, std::get<double>(it->second));
    } else if (const auto* cat = std::get_if<Categorical>(&p.kind)) {
      const auto& level = std::get<std::string>(it->second);
      auto pos = std::find(cat->levels.begin(), cat->levels.end(), level);
      if (pos == cat->levels.end()) throw Error(ErrorCode::UnknownLevel, p.name + "=" + level);
      index[i] = static_cast<std::size_t>(pos - cat->levels.begin());
    }
  }
  return index;
}

std::uint64_t DesignSpace::linear_key(const GridIndex& index) const {
  std::uint64_t key = 0;
  for (std::size_t i = 0; i < parameters_.size(); ++i)
    key = key * parameters_[i].cardinality() + index[i];
  return key;
}

GridIndex DesignSpace::from_linear_key(std::uint64_t key) const {
  GridIndex index(parameters_.size(), 0);
  for (std::size_t i = parameters_.size(); i-- > 0;) {
    const std::uint64_t c = parameters_[i].cardinality();
    index[i] = static_cast<std::size_t>(key % c);
    key /= c;
  }
  return index;
}

void DesignSpace::encode_index(const GridIndex& index, std::vector<double>& features) const {
  features.clear();
  for (std::size_t i = 0; i < parameters_.size(); ++i) {
    const auto& p = parameters_[i];
    if (const auto* c = std::get_if<Continuous>(&p.kind)) {
      features.push_back(std::get<double>(p.grid_value(index[i])));
      (void)c;
    } else if (const auto* cat = std::get_if<Categorical>(&p.kind)) {
      for (std::size_t l = 0; l < cat->levels.size(); ++l)
        features.push_back(l == index[i] ? 1.0 : 0.0);
    } else if (const auto* v = std::get_if<double>(&std::get<Fixed>(p.kind).value)) {
      features.push_back(*v);
    }
  }
}

nlohmann::ordered_json DesignSpace::to_json() const {
  nlohmann::ordered_json params = nlohmann::ordered_json::array();
  for (const auto& p : parameters_) {
    nlohmann::ordered_json j;
    j["name"] = p.name;
    if (const auto* c = std::get_if<Continuous>(&p.kind)) {
      j["kind"] = "continuous";
      j["min"] = c->min;
      j["max"] = c->max;
      j["step"] = c->step;
      j["unit"] = c->unit;
    } else if (const auto* cat = std::get_if<Categorical>(&p.kind)) {
      j["kind"] = "categorical";
      j["levels"] = cat->levels;
    } else {
      j["kind"] = "fixed";
      const auto& v = std::get<Fixed>(p.kind).value;
      if (const auto* d = std::get_if<double>(&v))
        j["value"] = *d;
      else
        j["value"] = std::get<std::string>(v);
    }
    params.push_back(std::move(j));
  }
  nlohmann::ordered_json out;
  out["name"] = name_;
  out["version"] = version_;
  out["parameters"] = std::move(params);
  return out;
}

DesignSpace DesignSpace::from_json(const nlohmann::json& j) {
  auto fail = [](const std::string& why) { throw Error(ErrorCode::InvalidSpace, why); };
  auto reject_unknown = [&](const nlohmann::json& obj, std::initializer_list<std::string_view> allowed,
                            const std::string& where) {
    for (const auto& [key, _] : obj.items())
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
        fail("unknown field '" + key + "' in " + where);
  };
  if (!j.is_object()) fail("design space must be a JSON object");
  reject_unknown(j, {"name", "version", "parameters"}, "design space");
  if (!j.contains("name") || !j.contains("version") || !j.contains("parameters"))
    fail("design space requires name, version and parameters");
  try {
    std::vector<ParameterSpec> params;
    for (const auto& pj : j.at("parameters")) {
      ParameterSpec p;
      p.name = pj.at("name").get<std::string>();
      const auto kind = pj.at("kind").get<std::string>();
      if (kind == "continuous") {
        reject_unknown(pj, {"name", "kind", "min", "max", "step", "unit"}, p.name);
        Continuous c;
        c.min = pj.at("min").get<double>();
        c.max = pj.at("max").get<double>();
        c.step = pj.at("step").get<double>();
        c.unit = pj.value("unit", std::string());
        p.kind = c;
      } else if (kind == "categorical") {
        reject_unknown(pj, {"name", "kind", "levels"}, p.name);
        p.kind = Categorical{pj.at("levels").get<std::vector<std::string>>()};
      } else if (kind == "fixed") {
        reject_unknown(pj, {"name", "kind", "value"}, p.name);
        const auto& v = pj.at("value");
        if (v.is_number())
          p.kind = Fixed{v.get<double>()};
        else if (v.is_string())
          p.kind = Fixed{v.get<std::string>()};
        else
          fail("fixed value of '" + p.name + "' must be a number or string");
      } else {
        fail("unknown kind '" + kind + "' for '" + p.name + "'");
      }
      params.push_back(std::move(p));
    }
    return DesignSpace(j.at("name").get<std::string>(), j.at("version").get<int>(),
                       std::move(params));
  } catch (const nlohmann::json::exception& e) {
    fail(e.what());
  }
  return {};
}

DesignSpace DesignSpace::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidSpace, path + ": " + e.what());
  }
  return from_json(j);
}

ValidationResult validate_point(const DesignSpace& space, const DesignPoint& point) {
  ValidationResult result;
  for (const auto& p : space.parameters()) {
    auto it = point.values.find(p.name);
    if (it == point.values.end()) {
      result.violations.push_back({p.name, Rule::Missing});
      continue;
    }
    const Value& v = it->second;
    if (const auto* c = std::get_if<Continuous>(&p.kind)) {
      const auto* x = std::get_if<double>(&v);
      if (!x || !std::isfinite(*x)) {
        result.violations.push_back({p.name, Rule::WrongType});
        continue;
      }
      const double pos = grid_position(*c, *x);
      const double last = static_cast<double>(continuous_cardinality(*c) - 1);
      if (pos < -kGridTolerance || pos > last + kGridTolerance)
        result.violations.push_back({p.name, Rule::OutOfBounds});
      else if (std::abs(pos - std::round(pos)) > kGridTolerance)
        result.violations.push_back({p.name, Rule::OffGrid});
    } else if (const auto* cat = std::get_if<Categorical>(&p.kind)) {
      const auto* s = std::get_if<std::string>(&v);
      if (!s) {
        result.violations.push_back({p.name, Rule::WrongType});
      } else if (std::find(cat->levels.begin(), cat->levels.end(), *s) == cat->levels.end()) {
        result.violations.push_back({p.name, Rule::NotALevel});
      }
    } else {
      const auto& f = std::get<Fixed>(p.kind);
      if (f.value.index() != v.index())
        result.violations.push_back({p.name, Rule::WrongType});
      else if (!fixed_matches(f.value, v))
        result.violations.push_back({p.name, Rule::FixedValueMismatch});
    }
  }
  for (const auto& [name, _] : point.values)
    if (!space.find(name)) result.violations.push_back({name, Rule::UnknownParameter});
  return result;
}

std::size_t snap_index(const Continuous& c, double value) {
  const std::size_t n = continuous_cardinality(c);
  const double pos = grid_position(c, value);
  if (!(pos > 0.0)) return 0;
  if (pos >= static_cast<double>(n - 1)) return n - 1;
  const double lower = std::floor(pos);
  // Exact midpoints (within representation noise) resolve downward.
  const std::size_t k = static_cast<std::size_t>(lower) + (pos - lower > 0.5 + 1e-9 ? 1 : 0);
  return std::min(k, n - 1);
}

DesignPoint snap_to_grid(const DesignSpace& space, const DesignPoint& point) {
  DesignPoint out;
  for (const auto& [name, value] : point.values) {
    auto i = space.find(name);
    if (!i) throw Error(ErrorCode::UnknownParameter, name);
    const auto& p = space.parameters()[*i];
    if (const auto* c = std::get_if<Continuous>(&p.kind)) {
      const auto* x = std::get_if<double>(&value);
      if (!x || !std::isfinite(*x))
        throw Error(ErrorCode::InvalidPoint, name + " must be a finite number");
      out.values.emplace(name, p.grid_value(snap_index(*c, *x)));
    } else {
      out.values.emplace(name, value);
    }
  }
  return out;
}

std::vector<DesignPoint> enumerate_grid(const DesignSpace& space, std::uint64_t limit) {
  const std::uint64_t total = space.cardinality();
  if (total > limit)
    throw Error(ErrorCode::GridTooLarge, "grid cardinality " + std::to_string(total) +
                                             " exceeds limit " + std::to_string(limit));
  std::vector<DesignPoint> points;
  points.reserve(total);
  for (std::uint64_t key = 0; key < total; ++key) points.push_back(space.point_at(space.from_linear_key(key)));
  return points;
}

std::vector<double> encode_features(const DesignSpace& space, const DesignPoint& point) {
  std::vector<double> features;
  features.reserve(space.feature_count());
  for (const auto& p : space.parameters()) {
    auto it = point.values.find(p.name);
    if (it == point.values.end()) throw Error(ErrorCode::InvalidPoint, "missing " + p.name);
    if (std::holds_alternative<Continuous>(p.kind)) {
      const auto* x = std::get_if<double>(&it->second);
      if (!x) throw Error(ErrorCode::InvalidPoint, p.name + " must be numeric");
      features.push_back(*x);
    } else if (const auto* cat = std::get_if<Categorical>(&p.kind)) {
      const auto* s = std::get_if<std::string>(&it->second);
      if (!s) throw Error(ErrorCode::InvalidPoint, p.name + " must be a level name");
      auto pos = std::find(cat->levels.begin(), cat->levels.end(), *s);
      if (pos == cat->levels.end()) throw Error(ErrorCode::UnknownLevel, p.name + "=" + *s);
      for (auto l = cat->levels.begin(); l != cat->levels.end(); ++l)
        features.push_back(l == pos ? 1.0 : 0.0);
    } else if (const auto* v = std::get_if<double>(&std::get<Fixed>(p.kind).value)) {
      features.push_back(*v);
    }
  }
  return features;
}

std::string format_number(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) return std::to_string(value);
  return std::string(buf, end);
}

double tidy_grid_value(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", value);
  return std::strtod(buf, nullptr);
}

std::string value_to_string(const Value& value) {
  if (const auto* d = std::get_if<double>(&value)) return format_number(*d);
  return std::get<std::string>(value);
}

nlohmann::ordered_json point_to_json(const DesignSpace& space, const DesignPoint& point) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  auto put = [&](const std::string& name, const Value& v) {
    if (const auto* d = std::get_if<double>(&v))
      j[name] = *d;
    else
      j[name] = std::get<std::string>(v);
  };
  for (const auto& p : space.parameters())
    if (auto it = point.values.find(p.name); it != point.values.end()) put(p.name, it->second);
  for (const auto& [name, v] : point.values)
    if (!space.find(name)) put(name, v);
  return j;
}

DesignPoint point_from_json(const nlohmann::json& j) {
  DesignPoint point;
  for (const auto& [name, v] : j.items()) {
    if (v.is_number())
      point.values.emplace(name, v.get<double>());
    else if (v.is_string())
      point.values.emplace(name, v.get<std::string>());
    else
      throw Error(ErrorCode::InvalidPoint, "value of '" + name + "' must be a number or string");
  }
  return point;
}

}  // namespace kilnloop
