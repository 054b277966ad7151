#include "kilnloop/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>

#include "kilnloop/csv.hpp"
#include "kilnloop/error.hpp"
#include "kilnloop/rng.hpp"

namespace kilnloop {
namespace {

std::optional<double> parse_double(std::string_view text) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t')) text.remove_suffix(1);
  if (text.empty()) return std::nullopt;
  if (text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(value))
    return std::nullopt;
  return value;
}

bool is_blank(std::string_view text) {
  return text.find_first_not_of(" \t") == std::string_view::npos;
}

[[noreturn]] void parse_error(std::size_t row, std::string_view column, const std::string& what) {
  throw Error(ErrorCode::ParseError,
              "row " + std::to_string(row) + ", column '" + std::string(column) + "': " + what);
}

double median_of(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace

std::string_view to_string(Status status) {
  switch (status) {
    case Status::Complete: return "complete";
    case Status::Partial: return "partial";
    case Status::Failed: return "failed";
  }
  return "complete";
}

std::optional<Status> parse_status(std::string_view text) {
  if (text == "complete") return Status::Complete;
  if (text == "partial") return Status::Partial;
  if (text == "failed") return Status::Failed;
  return std::nullopt;
}

std::string Provenance::label() const {
  if (is_historical()) return "historical";
  return "proposed:" + std::to_string(iteration);
}

std::optional<Provenance> Provenance::parse(std::string_view text) {
  if (text.empty() || text == "historical") return Provenance::historical();
  constexpr std::string_view prefix = "proposed:";
  if (text.substr(0, prefix.size()) != prefix) return std::nullopt;
  text.remove_prefix(prefix.size());
  int k = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), k);
  if (ec != std::errc() || ptr != text.data() + text.size() || k < 1) return std::nullopt;
  return Provenance::proposed(k);
}

std::size_t Dataset::capacity_count() const {
  return static_cast<std::size_t>(
      std::count_if(records.begin(), records.end(), [](const auto& r) { return r.has_capacity(); }));
}

Dataset Dataset::capacity_bearing() const {
  Dataset out{space, {}};
  for (const auto& r : records)
    if (r.has_capacity()) out.records.push_back(r);
  return out;
}

TrainingMatrix training_matrix(const Dataset& data) {
  TrainingMatrix m;
  m.cols = data.space.feature_count();
  for (const auto& r : data.records) {
    if (!r.has_capacity()) continue;
    auto f = encode_features(data.space, r.point);
    m.x.insert(m.x.end(), f.begin(), f.end());
    m.y.push_back(*r.discharge_capacity);
    ++m.rows;
  }
  return m;
}

IngestResult ingest_csv(const std::string& path, const DesignSpace& space) {
  return ingest_csv_text(csv::read_text(path), space);
}

IngestResult ingest_csv_text(std::string_view text, const DesignSpace& space) {
  const csv::Table table = csv::parse(text);
  if (table.header.empty()) throw Error(ErrorCode::EmptyDataset, "no data rows");

  std::vector<std::string> missing;
  auto require = [&](std::string_view name) -> std::size_t {
    auto c = table.column(name);
    if (!c) {
      missing.emplace_back(name);
      return 0;
    }
    return *c;
  };
  const std::size_t id_col = require(kIdColumn);
  const std::size_t status_col = require(kStatusColumn);
  const std::size_t cap_col = require(kCapacityColumn);
  std::vector<std::size_t> param_cols;
  for (const auto& p : space.parameters()) param_cols.push_back(require(p.name));
  if (!missing.empty()) {
    std::string list;
    for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
    throw Error(ErrorCode::SchemaMismatch, "missing required column(s): " + list);
  }
  const auto prov_col = table.column(kProvenanceColumn);
  const auto notes_col = table.column(kNotesColumn);
  if (table.rows.empty()) throw Error(ErrorCode::EmptyDataset, "no data rows");

  IngestResult result;
  result.dataset.space = space;
  std::set<std::string> ids;

  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const std::size_t row_no = r + 1;
    const auto& row = table.rows[r];
    if (row.size() != table.header.size())
      parse_error(row_no, "", "expected " + std::to_string(table.header.size()) + " fields, found " +
                                  std::to_string(row.size()));

    ExperimentRecord rec;
    rec.id = row[id_col];

    const std::string& cap_cell = row[cap_col];
    if (!is_blank(cap_cell)) {
      auto v = parse_double(cap_cell);
      if (!v) parse_error(row_no, kCapacityColumn, "not a number: '" + cap_cell + "'");
      rec.discharge_capacity = *v;
    }

    const std::string& status_cell = row[status_col];
    if (is_blank(status_cell)) {
      rec.status = rec.has_capacity() ? Status::Complete : Status::Partial;
    } else {
      auto s = parse_status(status_cell);
      if (!s) parse_error(row_no, kStatusColumn, "unknown status '" + status_cell + "'");
      rec.status = *s;
    }
    // An empty capacity cell means the experiment was not followed through.
    if (!rec.has_capacity() && rec.status == Status::Complete) rec.status = Status::Partial;

    for (std::size_t i = 0; i < space.size(); ++i) {
      const auto& p = space.parameters()[i];
      const std::string& cell = row[param_cols[i]];
      if (is_blank(cell)) continue;
      bool numeric = p.is_continuous();
      if (const auto* f = std::get_if<Fixed>(&p.kind)) numeric = std::holds_alternative<double>(f->value);
      if (numeric) {
        auto v = parse_double(cell);
        if (!v) parse_error(row_no, p.name, "not a number: '" + cell + "'");
        rec.point.values.emplace(p.name, *v);
      } else {
        rec.point.values.emplace(p.name, cell);
      }
    }

    if (prov_col && !is_blank(row[*prov_col])) {
      auto prov = Provenance::parse(row[*prov_col]);
      if (!prov) parse_error(row_no, kProvenanceColumn, "unknown provenance '" + row[*prov_col] + "'");
      rec.provenance = *prov;
    }
    if (notes_col && !row[*notes_col].empty()) rec.notes = row[*notes_col];

    auto issue = [&](std::string column, std::string message) {
      result.issues.push_back({row_no, std::move(column), std::move(message)});
    };

    if (is_blank(rec.id)) {
      issue(std::string(kIdColumn), "empty id; row skipped");
      continue;
    }
    if (ids.count(rec.id)) {
      issue(std::string(kIdColumn), "duplicate id '" + rec.id + "'; row skipped");
      continue;
    }
    if (rec.status == Status::Complete && *rec.discharge_capacity <= 0.0) {
      issue(std::string(kCapacityColumn), "complete record needs a positive capacity; row skipped");
      continue;
    }
    bool rejected = false;
    for (const auto& v : validate_point(space, rec.point).violations) {
      if (v.rule == Rule::Missing) {
        issue(v.parameter, "missing design value");
      } else {
        issue(v.parameter, std::string(to_string(v.rule)) + "; row skipped");
        rejected = true;
      }
    }
    if (rejected) continue;
    ids.insert(rec.id);
    result.dataset.records.push_back(std::move(rec));
  }
  return result;
}

std::string to_csv(const Dataset& data) {
  std::vector<std::string> header{std::string(kIdColumn), std::string(kStatusColumn),
                                  std::string(kCapacityColumn)};
  for (const auto& p : data.space.parameters()) header.push_back(p.name);
  header.emplace_back(kProvenanceColumn);
  header.emplace_back(kNotesColumn);
  std::string out = csv::format_row(header);
  for (const auto& r : data.records) {
    std::vector<std::string> row{r.id, std::string(to_string(r.status)),
                                 r.discharge_capacity ? format_number(*r.discharge_capacity) : ""};
    for (const auto& p : data.space.parameters()) {
      auto it = r.point.values.find(p.name);
      row.push_back(it == r.point.values.end() ? "" : value_to_string(it->second));
    }
    row.push_back(r.provenance.label());
    row.push_back(r.notes.value_or(""));
    out += csv::format_row(row);
  }
  return out;
}

std::optional<CleanPolicy> parse_clean_policy(std::string_view text) {
  if (text == "discard_incomplete" || text == "discard") return CleanPolicy::DiscardIncomplete;
  if (text == "impute_median" || text == "impute") return CleanPolicy::ImputeMedian;
  return std::nullopt;
}

Dataset clean(const Dataset& data, CleanPolicy policy) {
  Dataset out{data.space, {}};
  if (policy == CleanPolicy::DiscardIncomplete) {
    for (const auto& r : data.records)
      if (r.has_capacity() && validate_point(data.space, r.point).ok()) out.records.push_back(r);
  } else {
    std::map<std::string, Value> fill;
    for (const auto& p : data.space.parameters()) {
      if (const auto* c = std::get_if<Continuous>(&p.kind)) {
        std::vector<double> present;
        for (const auto& r : data.records)
          if (auto it = r.point.values.find(p.name); it != r.point.values.end())
            present.push_back(std::get<double>(it->second));
        if (!present.empty()) fill.emplace(p.name, p.grid_value(snap_index(*c, median_of(present))));
      } else if (const auto* f = std::get_if<Fixed>(&p.kind)) {
        fill.emplace(p.name, f->value);
      }
    }
    for (auto r : data.records) {
      for (const auto& [name, value] : fill) r.point.values.try_emplace(name, value);
      if (validate_point(data.space, r.point).ok()) out.records.push_back(std::move(r));
    }
  }
  if (out.records.empty()) throw Error(ErrorCode::EmptyDataset, "no record survives cleaning");
  return out;
}

Split split(const Dataset& data, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw Error(ErrorCode::InvalidConfig, "test fraction must lie in (0, 1)");
  std::vector<std::size_t> bearing;
  for (std::size_t i = 0; i < data.records.size(); ++i)
    if (data.records[i].has_capacity()) bearing.push_back(i);
  const std::size_t n = bearing.size();
  if (n < 2) throw Error(ErrorCode::InsufficientData, "split needs at least 2 records with capacity");
  auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(n)));
  n_test = std::clamp<std::size_t>(n_test, 1, n - 1);

  std::vector<std::size_t> order = bearing;
  Rng rng(seed);
  rng.shuffle(order);
  std::vector<std::size_t> test_idx(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test));
  std::vector<std::size_t> train_idx(order.begin() + static_cast<std::ptrdiff_t>(n_test), order.end());
  std::sort(test_idx.begin(), test_idx.end());
  std::sort(train_idx.begin(), train_idx.end());

  Split s{{data.space, {}}, {data.space, {}}};
  for (auto i : train_idx) s.train.records.push_back(data.records[i]);
  for (auto i : test_idx) s.test.records.push_back(data.records[i]);
  return s;
}

double sample_skewness(const std::vector<double>& values) {
  const std::size_t n = values.size();
  if (n == 0) return 0.0;
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(n);
  double m2 = 0.0, m3 = 0.0;
  for (double v : values) {
    const double d = v - mean;
    m2 += d * d;
    m3 += d * d * d;
  }
  m2 /= static_cast<double>(n);
  m3 /= static_cast<double>(n);
  // Relative cut-off so grid-noise around a single value does not read as spread.
  if (m2 <= 1e-24 * std::max(1.0, mean * mean)) return 0.0;
  return m3 / std::pow(m2, 1.5);
}

const ParameterDiagnostics& BiasReport::at(std::string_view name) const {
  for (const auto& p : parameters)
    if (p.name == name) return p;
  throw Error(ErrorCode::UnknownParameter, std::string(name));
}

std::vector<std::string> BiasReport::fixated() const {
  std::vector<std::string> out;
  for (const auto& p : parameters)
    if (p.one_value) out.push_back(p.name);
  return out;
}

nlohmann::ordered_json BiasReport::to_json() const {
  nlohmann::ordered_json params = nlohmann::ordered_json::array();
  std::vector<std::string> warnings;
  for (const auto& p : parameters) {
    nlohmann::ordered_json j;
    j["name"] = p.name;
    j["kind"] = p.kind;
    j["count"] = p.count;
    nlohmann::ordered_json h;
    if (!p.histogram.edges.empty()) h["edges"] = p.histogram.edges;
    if (!p.histogram.labels.empty()) h["labels"] = p.histogram.labels;
    h["counts"] = p.histogram.counts;
    j["histogram"] = std::move(h);
    j["skewness"] = p.skewness;
    j["mode_fraction"] = p.mode_fraction;
    j["one_value"] = p.one_value;
    j["near_fixated"] = p.near_fixated;
    j["skewed"] = p.skewed;
    params.push_back(std::move(j));
    if (p.near_fixated && !p.one_value)
      warnings.push_back(p.name + ": mode share " + format_number(p.mode_fraction) + " indicates near-fixation");
  }
  nlohmann::ordered_json out;
  out["record_count"] = record_count;
  out["parameters"] = std::move(params);
  nlohmann::ordered_json groups = nlohmann::ordered_json::object();
  for (const auto& [k, v] : subgroup_counts) groups[k] = v;
  out["subgroup_counts"] = std::move(groups);
  out["censoring_rate"] = censoring_rate;
  out["fixated"] = fixated();
  nlohmann::ordered_json skewed = nlohmann::ordered_json::array();
  for (const auto& p : parameters)
    if (p.skewed) skewed.push_back(p.name);
  out["skewed"] = std::move(skewed);
  out["warnings"] = warnings;
  return out;
}

BiasReport bias_report(const Dataset& data, std::size_t bins,
                       const std::vector<std::string>& subgroup_parameters) {
  if (bins == 0) throw Error(ErrorCode::InvalidConfig, "bins must be at least 1");
  if (data.records.empty()) throw Error(ErrorCode::EmptyDataset, "bias report needs at least one record");

  BiasReport report;
  report.record_count = data.records.size();
  const std::size_t censored = static_cast<std::size_t>(std::count_if(
      data.records.begin(), data.records.end(), [](const auto& r) { return !r.has_capacity(); }));
  report.censoring_rate = static_cast<double>(censored) / static_cast<double>(data.records.size());

  for (const auto& name : subgroup_parameters) {
    const auto& p = data.space.at(name);
    if (p.is_categorical())
      continue;  // categorical parameters are always grouped below
    std::map<std::size_t, std::size_t> by_index;
    for (const auto& r : data.records) {
      auto it = r.point.values.find(p.name);
      if (it == r.point.values.end()) continue;
      if (const auto* c = std::get_if<Continuous>(&p.kind))
        ++by_index[snap_index(*c, std::get<double>(it->second))];
      else
        ++by_index[0];
    }
    for (const auto& [k, count] : by_index)
      report.subgroup_counts[p.name + "=" + value_to_string(p.grid_value(k))] = count;
  }

  for (const auto& p : data.space.parameters()) {
    ParameterDiagnostics d;
    d.name = p.name;
    std::vector<std::size_t> per_value(p.cardinality(), 0);
    std::vector<double> numeric;
    for (const auto& r : data.records) {
      auto it = r.point.values.find(p.name);
      if (it == r.point.values.end()) continue;
      ++d.count;
      if (const auto* c = std::get_if<Continuous>(&p.kind)) {
        const double v = std::get<double>(it->second);
        numeric.push_back(v);
        ++per_value[snap_index(*c, v)];
      } else if (const auto* cat = std::get_if<Categorical>(&p.kind)) {
        const auto& s = std::get<std::string>(it->second);
        auto pos = std::find(cat->levels.begin(), cat->levels.end(), s);
        if (pos != cat->levels.end()) ++per_value[static_cast<std::size_t>(pos - cat->levels.begin())];
      } else {
        ++per_value[0];
        if (const auto* v = std::get_if<double>(&it->second)) numeric.push_back(*v);
      }
    }

    if (const auto* c = std::get_if<Continuous>(&p.kind)) {
      d.kind = "continuous";
      const double width = (c->max - c->min) / static_cast<double>(bins);
      d.histogram.counts.assign(bins, 0);
      for (std::size_t b = 0; b <= bins; ++b)
        d.histogram.edges.push_back(b == bins ? c->max : c->min + static_cast<double>(b) * width);
      for (double v : numeric) {
        auto b = static_cast<std::ptrdiff_t>(std::floor((v - c->min) / width));
        b = std::clamp<std::ptrdiff_t>(b, 0, static_cast<std::ptrdiff_t>(bins) - 1);
        ++d.histogram.counts[static_cast<std::size_t>(b)];
      }
      d.skewness = sample_skewness(numeric);
    } else if (const auto* cat = std::get_if<Categorical>(&p.kind)) {
      d.kind = "categorical";
      d.histogram.labels = cat->levels;
      d.histogram.counts = per_value;
      for (std::size_t l = 0; l < cat->levels.size(); ++l)
        report.subgroup_counts[p.name + "=" + cat->levels[l]] = per_value[l];
    } else {
      d.kind = "fixed";
      const auto& v = std::get<Fixed>(p.kind).value;
      if (const auto* x = std::get_if<double>(&v))
        d.histogram.edges = {*x, *x};
      else
        d.histogram.labels = {std::get<std::string>(v)};
      d.histogram.counts = {per_value[0]};
    }

    if (d.count > 0) {
      const std::size_t mode = *std::max_element(per_value.begin(), per_value.end());
      d.mode_fraction = static_cast<double>(mode) / static_cast<double>(d.count);
    }
    d.one_value = d.count >= 2 && d.mode_fraction == 1.0;
    d.near_fixated = d.mode_fraction > kNearFixationThreshold;
    d.skewed = std::abs(d.skewness) >= kSkewThreshold;
    report.parameters.push_back(std::move(d));
  }
  return report;
}

nlohmann::ordered_json record_to_json(const DesignSpace& space, const ExperimentRecord& record) {
  nlohmann::ordered_json j;
  j["id"] = record.id;
  j["status"] = to_string(record.status);
  if (record.discharge_capacity)
    j["discharge_capacity_mAh_g"] = *record.discharge_capacity;
  else
    j["discharge_capacity_mAh_g"] = nullptr;
  j["provenance"] = record.provenance.label();
  j["point"] = point_to_json(space, record.point);
  if (record.notes) j["notes"] = *record.notes;
  return j;
}

ExperimentRecord record_from_json(const nlohmann::json& j) {
  ExperimentRecord r;
  try {
    r.id = j.at("id").get<std::string>();
    auto status = parse_status(j.at("status").get<std::string>());
    if (!status) throw Error(ErrorCode::ParseError, "record " + r.id + ": bad status");
    r.status = *status;
    const auto& cap = j.at("discharge_capacity_mAh_g");
    if (!cap.is_null()) r.discharge_capacity = cap.get<double>();
    auto prov = Provenance::parse(j.at("provenance").get<std::string>());
    if (!prov) throw Error(ErrorCode::ParseError, "record " + r.id + ": bad provenance");
    r.provenance = *prov;
    r.point = point_from_json(j.at("point"));
    if (j.contains("notes")) r.notes = j.at("notes").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("record: ") + e.what());
  }
  return r;
}

nlohmann::ordered_json dataset_to_json(const Dataset& data) {
  nlohmann::ordered_json records = nlohmann::ordered_json::array();
  for (const auto& r : data.records) records.push_back(record_to_json(data.space, r));
  nlohmann::ordered_json j;
  j["format"] = "kilnloop-dataset";
  j["version"] = 1;
  j["space"] = data.space.to_json();
  j["records"] = std::move(records);
  return j;
}

Dataset dataset_from_json(const nlohmann::json& j) {
  Dataset data;
  try {
    if (j.value("format", std::string()) != "kilnloop-dataset")
      throw Error(ErrorCode::ParseError, "not a dataset file");
    data.space = DesignSpace::from_json(j.at("space"));
    std::set<std::string> ids;
    for (const auto& item : j.at("records")) {
      ExperimentRecord r = record_from_json(item);
      if (!ids.insert(r.id).second) throw Error(ErrorCode::ParseError, "duplicate record id " + r.id);
      for (const auto& v : validate_point(data.space, r.point).violations)
        if (v.rule != Rule::Missing)
          throw Error(ErrorCode::InvalidPoint, "record " + r.id + ": " + v.parameter + " " +
                                                   std::string(to_string(v.rule)));
      data.records.push_back(std::move(r));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("dataset: ") + e.what());
  }
  return data;
}

void save_dataset(const Dataset& data, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
  out << dataset_to_json(data).dump(1) << '\n';
  if (!out) throw Error(ErrorCode::Io, "failed writing " + path);
}

Dataset load_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
  try {
    return dataset_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ParseError, path + ": " + e.what());
  }
}

}  // namespace kilnloop
