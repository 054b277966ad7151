#include "kilnloop/campaign.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "kilnloop/csv.hpp"
#include "kilnloop/error.hpp"
#include "kilnloop/rng.hpp"

namespace kilnloop {
namespace {

constexpr std::string_view kStateFormat = "kilnloop-campaign";
constexpr int kStateVersion = 1;

constexpr std::uint64_t kTuningStream = 0x74756e65;
constexpr std::uint64_t kSwarmStream = 0x70736f00;
constexpr std::uint64_t kLabStream = 0x6c616200;

nlohmann::ordered_json optional_number(const std::optional<double>& v) {
  return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

std::optional<double> read_optional(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

std::string result_id(int iteration, int rank) {
  char id[48];
  std::snprintf(id, sizeof id, "it%d-r%02d", iteration, rank);
  return id;
}

ExclusionSet ledger_keys(const CampaignState& state) {
  ExclusionSet keys;
  for (const auto& r : state.ledger.records)
    if (validate_point(state.space, r.point).ok()) keys.insert(state.space.linear_key(state.space.index_of(r.point)));
  return keys;
}

int parse_int(const std::string& text, std::size_t line, std::string_view column) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw Error(ErrorCode::ParseError,
                "line " + std::to_string(line) + ", column '" + std::string(column) + "': not an integer");
  return value;
}

double parse_double(const std::string& text, std::size_t line, std::string_view column) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(value))
    throw Error(ErrorCode::ParseError,
                "line " + std::to_string(line) + ", column '" + std::string(column) + "': not a number");
  return value;
}

}  // namespace

void CampaignConfig::validate() const {
  if (batch_size < 1) throw Error(ErrorCode::InvalidConfig, "batch_size must be >= 1");
  if (tuning_trials < 1) throw Error(ErrorCode::InvalidConfig, "tuning_trials must be >= 1");
  if (cv_folds < 2) throw Error(ErrorCode::InvalidConfig, "cv_folds must be >= 2");
  pso.validate();
}

nlohmann::ordered_json CampaignConfig::to_json() const {
  nlohmann::ordered_json j;
  j["batch_size"] = batch_size;
  j["tuning_trials"] = tuning_trials;
  j["cv_folds"] = cv_folds;
  j["surrogate_algorithm"] = to_string(surrogate_algorithm);
  j["pso"] = pso.to_json();
  j["seed"] = seed;
  return j;
}

CampaignConfig CampaignConfig::from_json(const nlohmann::json& j) {
  CampaignConfig c;
  try {
    c.batch_size = j.value("batch_size", c.batch_size);
    c.tuning_trials = j.value("tuning_trials", c.tuning_trials);
    c.cv_folds = j.value("cv_folds", c.cv_folds);
    if (j.contains("surrogate_algorithm")) {
      auto algo = parse_algorithm(j.at("surrogate_algorithm").get<std::string>());
      if (!algo) throw Error(ErrorCode::InvalidConfig, "unknown surrogate_algorithm");
      c.surrogate_algorithm = *algo;
    }
    if (j.contains("pso")) c.pso = PsoConfig::from_json(j.at("pso"));
    c.seed = j.value("seed", c.seed);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("campaign config: ") + e.what());
  }
  c.validate();
  return c;
}

const IterationRecord* CampaignState::open_iteration() const {
  if (!iterations.empty() && !iterations.back().closed) return &iterations.back();
  return nullptr;
}

const ExperimentRecord& CampaignState::record(const std::string& id) const {
  for (const auto& r : ledger.records)
    if (r.id == id) return r;
  throw Error(ErrorCode::ParseError, "ledger has no record '" + id + "'");
}

nlohmann::ordered_json CampaignState::to_json() const {
  nlohmann::ordered_json its = nlohmann::ordered_json::array();
  for (const auto& it : iterations) {
    nlohmann::ordered_json proposals = nlohmann::ordered_json::array();
    for (const auto& c : it.proposals) {
      nlohmann::ordered_json p;
      p["rank"] = c.rank;
      p["predicted_capacity"] = c.predicted_capacity;
      p["point"] = point_to_json(space, c.point);
      proposals.push_back(std::move(p));
    }
    nlohmann::ordered_json j;
    j["index"] = it.index;
    j["chosen_spec"] = it.chosen_spec.to_json();
    j["chosen_cv_rmse"] = it.chosen_cv_rmse;
    j["proposals"] = std::move(proposals);
    j["results"] = it.result_ids;
    j["batch_mape"] = optional_number(it.batch_mape);
    j["best_measured"] = optional_number(it.best_measured);
    j["closed"] = it.closed;
    its.push_back(std::move(j));
  }
  nlohmann::ordered_json ledger_json = nlohmann::ordered_json::array();
  for (const auto& r : ledger.records) ledger_json.push_back(record_to_json(space, r));

  nlohmann::ordered_json j;
  j["format"] = kStateFormat;
  j["version"] = kStateVersion;
  j["config"] = config.to_json();
  j["space"] = space.to_json();
  j["model_artifact"] = model_artifact;
  if (oracle) j["oracle"] = oracle->to_json();
  j["ledger"] = std::move(ledger_json);
  j["iterations"] = std::move(its);
  return j;
}

CampaignState CampaignState::from_json(const nlohmann::json& j) {
  CampaignState s;
  try {
    if (j.value("format", std::string()) != kStateFormat) throw Error(ErrorCode::ParseError, "not a campaign state");
    if (j.at("version").get<int>() != kStateVersion)
      throw Error(ErrorCode::ParseError, "unsupported campaign state version");
    s.config = CampaignConfig::from_json(j.at("config"));
    s.space = DesignSpace::from_json(j.at("space"));
    s.model_artifact = j.value("model_artifact", std::string());
    if (j.contains("oracle")) s.oracle = lab::OracleConfig::from_json(j.at("oracle"));
    s.ledger.space = s.space;
    std::set<std::string> ids;
    for (const auto& r : j.at("ledger")) {
      s.ledger.records.push_back(record_from_json(r));
      if (!ids.insert(s.ledger.records.back().id).second)
        throw Error(ErrorCode::ParseError, "duplicate ledger id " + s.ledger.records.back().id);
    }
    int expected = 1;
    for (const auto& item : j.at("iterations")) {
      IterationRecord it;
      it.index = item.at("index").get<int>();
      if (it.index != expected++) throw Error(ErrorCode::ParseError, "iterations are not numbered consecutively");
      it.chosen_spec = ModelSpec::from_json(item.at("chosen_spec"));
      it.chosen_cv_rmse = item.at("chosen_cv_rmse").get<double>();
      for (const auto& p : item.at("proposals"))
        it.proposals.push_back(
            {point_from_json(p.at("point")), p.at("predicted_capacity").get<double>(), p.at("rank").get<int>()});
      it.result_ids = item.at("results").get<std::vector<std::string>>();
      for (const auto& id : it.result_ids)
        if (!ids.contains(id)) throw Error(ErrorCode::ParseError, "result id '" + id + "' is not in the ledger");
      it.batch_mape = read_optional(item, "batch_mape");
      it.best_measured = read_optional(item, "best_measured");
      it.closed = item.at("closed").get<bool>();
      if (!s.iterations.empty() && !s.iterations.back().closed)
        throw Error(ErrorCode::ParseError, "only the last iteration may be open");
      s.iterations.push_back(std::move(it));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("campaign state: ") + e.what());
  }
  return s;
}

CampaignState init(const Dataset& dataset, const DesignSpace& space, const CampaignConfig& config) {
  config.validate();
  if (!(dataset.space == space))
    throw Error(ErrorCode::SpaceMismatch, "dataset space '" + dataset.space.name() + "' differs from '" +
                                              space.name() + "'");
  std::size_t usable = 0;
  for (const auto& r : dataset.records)
    if (r.has_capacity() && validate_point(space, r.point).ok()) ++usable;
  if (usable < config.cv_folds)
    throw Error(ErrorCode::InsufficientData, std::to_string(config.cv_folds) + "-fold tuning needs at least " +
                                                 std::to_string(config.cv_folds) +
                                                 " complete capacity-bearing records, found " + std::to_string(usable));
  CampaignState state;
  state.config = config;
  state.space = space;
  state.ledger = dataset;
  return state;
}

Proposal propose(const CampaignState& state) {
  if (const auto* open = state.open_iteration())
    throw Error(ErrorCode::OpenIterationExists,
                "iteration " + std::to_string(open->index) + " has no recorded results yet");
  const auto& config = state.config;
  const int k = static_cast<int>(state.iterations.size()) + 1;

  const Dataset training = clean(state.ledger, CleanPolicy::DiscardIncomplete);
  const SearchResult search = random_search(config.surrogate_algorithm, training, config.tuning_trials,
                                            derive_seed(config.seed, kTuningStream + static_cast<std::uint64_t>(k)),
                                            config.cv_folds);
  TrainedModel model = train(search.best, training);

  PsoConfig pso = config.pso;
  pso.seed = derive_seed(config.seed ^ config.pso.seed, kSwarmStream + static_cast<std::uint64_t>(k));
  std::vector<Candidate> candidates = optimize(model, state.space, pso, config.batch_size, ledger_keys(state));

  IterationRecord it;
  it.index = k;
  it.chosen_spec = search.best;
  it.chosen_cv_rmse = search.trials[search.best_index].mean_rmse;
  it.proposals = candidates;

  CampaignState next = state;
  next.iterations.push_back(std::move(it));
  std::string sheet = candidates_csv(state.space, candidates, k);
  return {std::move(next), std::move(model), std::move(sheet)};
}

double batch_mape(const std::vector<double>& predicted, const std::vector<double>& measured) {
  if (predicted.size() != measured.size())
    throw Error(ErrorCode::LengthMismatch, "predicted and measured lengths differ");
  if (predicted.empty()) throw Error(ErrorCode::EmptyInput, "no measured pairs");
  double total = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i)
    total += std::abs(predicted[i] - measured[i]) / measured[i] * 100.0;
  return total / static_cast<double>(predicted.size());
}

CampaignState record(const CampaignState& state, std::string_view results_csv) {
  const IterationRecord* open = state.open_iteration();
  if (!open) throw Error(ErrorCode::NoOpenIteration, "there is no open iteration to record");
  const DesignSpace& space = state.space;
  const csv::Table table = csv::parse(results_csv);

  const auto iter_col = table.column("iteration");
  const auto rank_col = table.column("rank");
  const auto status_col = table.column(kStatusColumn);
  const auto cap_col = table.column(kCapacityColumn);
  if (!iter_col || !status_col || !cap_col)
    throw Error(ErrorCode::SchemaMismatch, "results need columns iteration, rank, status, discharge_capacity_mAh_g");
  std::vector<std::optional<std::size_t>> param_cols;
  bool has_points = true;
  for (const auto& p : space.parameters()) {
    param_cols.push_back(table.column(p.name));
    if (!param_cols.back()) has_points = false;
  }
  if (!rank_col && !has_points)
    throw Error(ErrorCode::SchemaMismatch, "results need a rank column or one column per parameter");

  std::map<std::uint64_t, int> rank_by_key;
  for (const auto& c : open->proposals) rank_by_key[space.linear_key(space.index_of(c.point))] = c.rank;

  std::map<int, ExperimentRecord> by_rank;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::size_t line = table.row_lines[r];
    const int iteration = parse_int(row[*iter_col], line, "iteration");
    if (iteration != open->index)
      throw Error(ErrorCode::UnknownProposal, "line " + std::to_string(line) + " refers to iteration " +
                                                  std::to_string(iteration) + ", open iteration is " +
                                                  std::to_string(open->index));
    int rank = 0;
    if (rank_col && !row[*rank_col].empty()) {
      rank = parse_int(row[*rank_col], line, "rank");
      if (rank < 1 || rank > static_cast<int>(open->proposals.size()))
        throw Error(ErrorCode::UnknownProposal, "line " + std::to_string(line) + ": iteration " +
                                                    std::to_string(open->index) + " has no proposal of rank " +
                                                    std::to_string(rank));
    } else if (has_points) {
      DesignPoint point;
      for (std::size_t i = 0; i < space.size(); ++i) {
        const auto& p = space.parameters()[i];
        const std::string& cell = row[*param_cols[i]];
        if (p.is_categorical() || (p.is_fixed() && std::holds_alternative<std::string>(std::get<Fixed>(p.kind).value)))
          point.values[p.name] = cell;
        else
          point.values[p.name] = parse_double(cell, line, p.name);
      }
      auto found = validate_point(space, point).ok() ? rank_by_key.find(space.linear_key(space.index_of(point)))
                                                     : rank_by_key.end();
      if (found == rank_by_key.end())
        throw Error(ErrorCode::UnknownProposal,
                    "line " + std::to_string(line) + " matches no proposal of iteration " + std::to_string(open->index));
      rank = found->second;
    } else {
      throw Error(ErrorCode::UnknownProposal, "line " + std::to_string(line) + " has no rank");
    }
    if (by_rank.contains(rank))
      throw Error(ErrorCode::DuplicateResult, "line " + std::to_string(line) + " repeats rank " + std::to_string(rank));

    auto status = parse_status(row[*status_col]);
    if (!status)
      throw Error(ErrorCode::ParseError, "line " + std::to_string(line) + ", column 'status': unknown status '" +
                                             row[*status_col] + "'");
    ExperimentRecord rec;
    rec.id = result_id(open->index, rank);
    rec.point = open->proposals[static_cast<std::size_t>(rank - 1)].point;
    rec.status = *status;
    rec.provenance = Provenance::proposed(open->index);
    if (!row[*cap_col].empty()) {
      const double cap = parse_double(row[*cap_col], line, kCapacityColumn);
      if (!(cap > 0.0))
        throw Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": capacity must be > 0");
      rec.discharge_capacity = cap;
    } else if (rec.status == Status::Complete) {
      rec.status = Status::Partial;
    }
    by_rank.emplace(rank, std::move(rec));
  }

  std::vector<std::string> missing;
  for (const auto& c : open->proposals)
    if (!by_rank.contains(c.rank)) missing.push_back(std::to_string(c.rank));
  if (!missing.empty()) {
    std::string list;
    for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
    throw Error(ErrorCode::MissingResult, "iteration " + std::to_string(open->index) +
                                              " is missing results for rank(s) " + list);
  }

  CampaignState next = state;
  IterationRecord& it = next.iterations.back();
  std::vector<double> predicted, measured;
  for (auto& [rank, rec] : by_rank) {
    for (const auto& existing : next.ledger.records)
      if (existing.id == rec.id) throw Error(ErrorCode::DuplicateResult, "ledger already holds " + rec.id);
    if (rec.discharge_capacity) {
      predicted.push_back(it.proposals[static_cast<std::size_t>(rank - 1)].predicted_capacity);
      measured.push_back(*rec.discharge_capacity);
    }
    it.result_ids.push_back(rec.id);
    next.ledger.records.push_back(std::move(rec));
  }
  if (!measured.empty()) {
    it.batch_mape = batch_mape(predicted, measured);
    it.best_measured = *std::max_element(measured.begin(), measured.end());
  }
  it.closed = true;
  return next;
}

nlohmann::ordered_json CampaignReport::to_json() const {
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& s : iterations) {
    nlohmann::ordered_json r;
    r["iteration"] = s.iteration;
    r["proposals"] = s.proposals;
    r["measured"] = s.measured;
    r["batch_mape"] = optional_number(s.batch_mape);
    r["best_measured"] = optional_number(s.best_measured);
    r["min_measured"] = optional_number(s.min_measured);
    r["max_measured"] = optional_number(s.max_measured);
    rows.push_back(std::move(r));
  }
  nlohmann::ordered_json scatter_rows = nlohmann::ordered_json::array();
  for (const auto& s : scatter) {
    nlohmann::ordered_json r;
    r["iteration"] = s.iteration;
    r["rank"] = s.rank;
    r["id"] = s.id;
    r["predicted"] = s.predicted;
    r["measured"] = optional_number(s.measured);
    r["status"] = to_string(s.status);
    scatter_rows.push_back(std::move(r));
  }
  nlohmann::ordered_json j;
  j["history_best_measured"] = optional_number(history_best_measured);
  j["iterations"] = std::move(rows);
  j["scatter"] = std::move(scatter_rows);
  return j;
}

std::string CampaignReport::scatter_csv() const {
  std::string out = csv::format_row({"iteration", "rank", "predicted", "measured", "status"});
  for (const auto& s : scatter)
    out += csv::format_row({std::to_string(s.iteration), std::to_string(s.rank), format_number(s.predicted),
                            s.measured ? format_number(*s.measured) : "", std::string(to_string(s.status))});
  return out;
}

CampaignReport campaign_report(const CampaignState& state) {
  CampaignReport report;
  for (const auto& r : state.ledger.records)
    if (r.provenance.is_historical() && r.discharge_capacity)
      report.history_best_measured = std::max(report.history_best_measured.value_or(*r.discharge_capacity),
                                              *r.discharge_capacity);
  for (const auto& it : state.iterations) {
    if (!it.closed) continue;
    IterationSummary s;
    s.iteration = it.index;
    s.proposals = it.proposals.size();
    s.batch_mape = it.batch_mape;
    s.best_measured = it.best_measured;
    for (std::size_t i = 0; i < it.result_ids.size(); ++i) {
      const auto& rec = state.record(it.result_ids[i]);
      const int rank = static_cast<int>(i + 1);
      report.scatter.push_back({it.index, rank, rec.id, it.proposals[i].predicted_capacity, rec.discharge_capacity,
                                rec.status});
      if (rec.discharge_capacity) {
        const double m = *rec.discharge_capacity;
        ++s.measured;
        s.min_measured = std::min(s.min_measured.value_or(m), m);
        s.max_measured = std::max(s.max_measured.value_or(m), m);
      }
    }
    report.iterations.push_back(s);
  }
  if (report.iterations.empty()) throw Error(ErrorCode::NoClosedIterations, "no iteration has been recorded yet");
  return report;
}

std::string provenance_scatter_csv(const CampaignState& state, double test_fraction) {
  Dataset history{state.space, {}};
  for (const auto& r : state.ledger.records)
    if (r.provenance.is_historical()) history.records.push_back(r);
  const Dataset usable = clean(history, CleanPolicy::DiscardIncomplete);
  const Split parts = split(usable, test_fraction, state.config.seed);
  const ModelSpec spec = state.iterations.empty()
                             ? ModelSpec::defaults(state.config.surrogate_algorithm, state.config.seed)
                             : state.iterations.front().chosen_spec;
  const TrainedModel zero_shot = train(spec, parts.train);

  std::string out = csv::format_row({"group", "id", "iteration", "rank", "predicted", "measured", "status"});
  auto emit = [&](const std::string& group, const ExperimentRecord& r, int iteration, int rank, double predicted) {
    out += csv::format_row({group, r.id, std::to_string(iteration), rank > 0 ? std::to_string(rank) : "",
                            format_number(predicted), format_number(*r.discharge_capacity),
                            std::string(to_string(r.status))});
  };
  for (const auto& [group, part] : {std::pair{"historical-train", &parts.train}, {"historical-test", &parts.test}})
    for (const auto& r : part->records) emit(group, r, 0, 0, predict(zero_shot, {r.point}).front());
  for (const auto& it : state.iterations)
    for (std::size_t i = 0; i < it.result_ids.size(); ++i) {
      const auto& r = state.record(it.result_ids[i]);
      if (r.discharge_capacity)
        emit(r.provenance.label(), r, it.index, static_cast<int>(i + 1), it.proposals[i].predicted_capacity);
    }
  return out;
}

std::vector<std::pair<std::string, std::string>> provenance_distributions(const CampaignState& state,
                                                                          std::size_t bins) {
  std::map<int, Dataset> groups;
  for (const auto& r : state.ledger.records) {
    auto [pos, _] = groups.try_emplace(r.provenance.iteration, Dataset{state.space, {}});
    pos->second.records.push_back(r);
  }
  std::vector<std::string> names;
  std::vector<BiasReport> reports;
  for (const auto& [k, data] : groups) {
    names.push_back(data.records.front().provenance.label());
    reports.push_back(bias_report(data, bins));
  }

  std::vector<std::pair<std::string, std::string>> tables;
  for (std::size_t p = 0; p < state.space.size(); ++p) {
    const auto& first = reports.front().parameters[p].histogram;
    const bool numeric = !first.edges.empty();
    std::vector<std::string> header = numeric ? std::vector<std::string>{"bin_left", "bin_right"}
                                              : std::vector<std::string>{"level"};
    header.insert(header.end(), names.begin(), names.end());
    std::string out = csv::format_row(header);
    for (std::size_t b = 0; b < first.counts.size(); ++b) {
      std::vector<std::string> row;
      if (numeric) {
        row.push_back(format_number(first.edges[b]));
        row.push_back(format_number(first.edges[b + 1]));
      } else {
        row.push_back(first.labels[b]);
      }
      for (const auto& rep : reports) row.push_back(std::to_string(rep.parameters[p].histogram.counts[b]));
      out += csv::format_row(row);
    }
    tables.emplace_back(state.space.parameters()[p].name, std::move(out));
  }
  return tables;
}

StateLock::StateLock(const std::string& state_path) {
  const std::string lock_path = state_path + ".lock";
  fd_ = ::open(lock_path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
  if (fd_ < 0) throw Error(ErrorCode::Io, "cannot open lock file " + lock_path);
  if (::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
    ::close(fd_);
    fd_ = -1;
    throw Error(ErrorCode::StateLocked, state_path + " is in use by another process");
  }
}

StateLock::~StateLock() {
  if (fd_ >= 0) {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
}

void write_file_atomic(const std::string& path, std::string_view contents) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + tmp);
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) throw Error(ErrorCode::Io, "failed writing " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorCode::Io, "cannot replace " + path);
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void save_state(const CampaignState& state, const std::string& path) {
  write_file_atomic(path, state.to_json().dump(1) + "\n");
}

CampaignState load_state(const std::string& path) {
  const std::string text = read_file(path);
  try {
    return CampaignState::from_json(nlohmann::json::parse(text));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ParseError, path + ": " + e.what());
  }
}

std::string measure_open_iteration(const CampaignState& state, const lab::OracleConfig& oracle) {
  const IterationRecord* open = state.open_iteration();
  if (!open) throw Error(ErrorCode::NoOpenIteration, "there is no open iteration to measure");
  const std::uint64_t stream = derive_seed(state.config.seed, kLabStream + static_cast<std::uint64_t>(open->index));
  std::string out = csv::format_row({"iteration", "rank", std::string(kStatusColumn), std::string(kCapacityColumn)});
  for (const auto& c : open->proposals) {
    const ExperimentRecord rec = lab::measure(oracle, c.point, derive_seed(stream, static_cast<std::uint64_t>(c.rank)));
    out += csv::format_row({std::to_string(open->index), std::to_string(c.rank), std::string(to_string(rec.status)),
                            rec.discharge_capacity ? format_number(*rec.discharge_capacity) : ""});
  }
  return out;
}

namespace {

SimulationResult run_loop(CampaignState state, const lab::OracleConfig& oracle, std::size_t iterations) {
  SimulationResult result{std::move(state), std::nullopt, {}, {}};
  for (std::size_t i = 0; i < iterations; ++i) {
    Proposal p = propose(result.state);
    result.sheets.push_back(std::move(p.sheet_csv));
    result.model = std::move(p.model);
    result.results.push_back(measure_open_iteration(p.state, oracle));
    result.state = record(p.state, result.results.back());
  }
  return result;
}

}  // namespace

SimulationResult simulate(const lab::OracleConfig& oracle, std::size_t history, std::size_t iterations,
                          const CampaignConfig& config) {
  oracle.validate();
  if (iterations < 1) throw Error(ErrorCode::InvalidConfig, "simulation needs at least one iteration");
  const Dataset past = lab::generate_history(oracle, history, config.seed);
  CampaignState state = init(past, oracle.space, config);
  state.oracle = oracle;
  return run_loop(std::move(state), oracle, iterations);
}

SimulationResult replay(const CampaignState& state) {
  if (!state.oracle) throw Error(ErrorCode::InvalidConfig, "state was not produced by a simulated campaign");
  Dataset past{state.space, {}};
  for (const auto& r : state.ledger.records)
    if (r.provenance.is_historical()) past.records.push_back(r);
  CampaignState fresh = init(past, state.space, state.config);
  fresh.oracle = state.oracle;
  fresh.model_artifact = state.model_artifact;
  std::size_t closed = 0;
  for (const auto& it : state.iterations) closed += it.closed ? 1 : 0;
  if (closed == 0) return {std::move(fresh), std::nullopt, {}, {}};
  return run_loop(std::move(fresh), *state.oracle, closed);
}

}  // namespace kilnloop
