#include <catch_amalgamated.hpp>

#include <cmath>
#include <set>

#include "kilnloop/dataset.hpp"
#include "kilnloop/error.hpp"

using namespace kilnloop;

namespace {

DesignSpace lab_space() {
  return DesignSpace("mini", 1,
                     {{"calcination_temp", Continuous{650, 780, 5, "C"}},
                      {"coating_time", Continuous{0, 480, 30, "min"}},
                      {"atmosphere", Fixed{std::string("Air")}}});
}

const char* kHeader = "id,status,discharge_capacity_mAh_g,calcination_temp,coating_time,atmosphere\n";

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::Io;
}

Dataset make_dataset(std::size_t n, std::size_t censored) {
  Dataset d{lab_space(), {}};
  for (std::size_t i = 0; i < n; ++i) {
    ExperimentRecord r;
    r.id = "R" + std::to_string(i);
    r.point.values = {{"calcination_temp", 650.0 + 5.0 * static_cast<double>(i % 20)},
                      {"coating_time", 120.0},
                      {"atmosphere", std::string("Air")}};
    if (i < censored) {
      r.status = Status::Partial;
    } else {
      r.discharge_capacity = 200.0 + static_cast<double>(i);
    }
    d.records.push_back(r);
  }
  return d;
}

}  // namespace

TEST_CASE("ingest parses capacities and censored rows", "[dataset]") {
  const std::string text = std::string(kHeader) +
                           "E1,complete,226.4,730,120,Air\n"
                           "E2,complete,,735,120,Air\n"
                           "E3,failed,,740,120,Air\n";
  const auto result = ingest_csv_text(text, lab_space());
  REQUIRE(result.issues.empty());
  const auto& recs = result.dataset.records;
  REQUIRE(recs.size() == 3);
  REQUIRE(recs[0].discharge_capacity == 226.4);
  REQUIRE(recs[0].status == Status::Complete);
  REQUIRE_FALSE(recs[1].discharge_capacity);
  REQUIRE(recs[1].status == Status::Partial);
  REQUIRE(recs[2].status == Status::Failed);
}

TEST_CASE("ingest reports parse errors with row and column", "[dataset]") {
  const std::string text = std::string(kHeader) + "E1,complete,226.4,abc,120,Air\n";
  try {
    (void)ingest_csv_text(text, lab_space());
    FAIL("expected ParseError");
  } catch (const Error& e) {
    REQUIRE(e.code() == ErrorCode::ParseError);
    const std::string msg = e.what();
    REQUIRE(msg.find("row 1") != std::string::npos);
    REQUIRE(msg.find("calcination_temp") != std::string::npos);
  }
}

TEST_CASE("ingest schema errors", "[dataset]") {
  REQUIRE(code_of([] { (void)ingest_csv_text("id,status,calcination_temp\nE1,complete,730\n", lab_space()); }) ==
          ErrorCode::SchemaMismatch);
  REQUIRE(code_of([] { (void)ingest_csv_text(kHeader, lab_space()); }) == ErrorCode::EmptyDataset);
}

TEST_CASE("ingest keeps invalid rows as issues", "[dataset]") {
  const std::string text = std::string(kHeader) +
                           "E1,complete,226.4,732,120,Air\n"
                           "E2,complete,220,730,120,Air\n"
                           "E2,complete,221,735,120,Air\n"
                           "E4,complete,220,,120,Air\n";
  const auto result = ingest_csv_text(text, lab_space());
  REQUIRE(result.issues.size() >= 3);
  std::set<std::string> ids;
  for (const auto& r : result.dataset.records) ids.insert(r.id);
  REQUIRE(ids == std::set<std::string>{"E2", "E4"});
}

TEST_CASE("CSV export round-trips", "[dataset]") {
  const auto d = make_dataset(6, 2);
  const auto back = ingest_csv_text(to_csv(d), d.space);
  REQUIRE(back.issues.empty());
  REQUIRE(back.dataset.records == d.records);
}

TEST_CASE("clean discards capacity-less records", "[dataset]") {
  const auto d = make_dataset(10, 3);
  const auto c = clean(d, CleanPolicy::DiscardIncomplete);
  REQUIRE(c.records.size() == 7);
  for (const auto& r : c.records) REQUIRE(r == d.records[static_cast<std::size_t>(std::stoi(r.id.substr(1)))]);
  REQUIRE(code_of([] { (void)clean(make_dataset(4, 4), CleanPolicy::DiscardIncomplete); }) ==
          ErrorCode::EmptyDataset);
}

TEST_CASE("impute fills design fields with the grid median", "[dataset]") {
  auto d = make_dataset(4, 0);
  d.records[0].point.values["coating_time"] = 120.0;
  d.records[1].point.values["coating_time"] = 240.0;
  d.records[2].point.values["coating_time"] = 240.0;
  d.records[3].point.values.erase("coating_time");
  const auto c = clean(d, CleanPolicy::ImputeMedian);
  REQUIRE(c.records.size() == 4);
  REQUIRE(std::get<double>(c.records[3].point.values.at("coating_time")) == 240.0);
  for (std::size_t i = 0; i < 4; ++i) REQUIRE(c.records[i].discharge_capacity == d.records[i].discharge_capacity);

  const auto partial = clean(make_dataset(3, 1), CleanPolicy::ImputeMedian);
  REQUIRE(partial.records.size() == 3);
  REQUIRE_FALSE(partial.records[0].discharge_capacity);
}

TEST_CASE("split sizes and determinism", "[dataset]") {
  const auto d = make_dataset(100, 0);
  const auto s = split(d, 0.2, 42);
  REQUIRE(s.train.records.size() == 80);
  REQUIRE(s.test.records.size() == 20);
  const auto again = split(d, 0.2, 42);
  REQUIRE(again.train.records == s.train.records);
  REQUIRE(again.test.records == s.test.records);
  std::set<std::string> ids;
  for (const auto& r : s.train.records) ids.insert(r.id);
  for (const auto& r : s.test.records) REQUIRE(ids.insert(r.id).second);
  REQUIRE(ids.size() == 100);

  const auto five = split(make_dataset(5, 0), 0.2, 1);
  REQUIRE(five.train.records.size() == 4);
  REQUIRE(five.test.records.size() == 1);
  REQUIRE(code_of([] { (void)split(make_dataset(3, 2), 0.2, 1); }) == ErrorCode::InsufficientData);
  REQUIRE(split(make_dataset(12, 2), 0.2, 1).train.records.size() == 8);
}

TEST_CASE("skewness estimator", "[dataset]") {
  REQUIRE(sample_skewness({-1, 0, 1, -1, 0, 1}) == 0.0);
  REQUIRE(sample_skewness({5, 5, 5}) == 0.0);
  REQUIRE(sample_skewness({0, 0, 0, 10}) > 1.0);
}

TEST_CASE("bias report flags one-value parameters", "[dataset]") {
  auto d = make_dataset(50, 5);
  for (auto& r : d.records) r.point.values["coating_time"] = 420.0;
  const auto report = bias_report(d, 8, {"coating_time"});
  const auto& coat = report.at("coating_time");
  REQUIRE(coat.mode_fraction == 1.0);
  REQUIRE(coat.one_value);
  REQUIRE(coat.skewness == 0.0);
  REQUIRE(report.censoring_rate == Catch::Approx(0.1));
  REQUIRE(report.subgroup_counts.at("coating_time=420") == 50);

  std::size_t total = 0;
  for (auto c : report.at("calcination_temp").histogram.counts) total += c;
  REQUIRE(total == 50);
  REQUIRE(report.at("calcination_temp").histogram.edges.size() == 9);
  REQUIRE_FALSE(report.at("calcination_temp").one_value);

  const auto fixated = report.fixated();
  REQUIRE(std::find(fixated.begin(), fixated.end(), "atmosphere") != fixated.end());
  const auto j = report.to_json();
  REQUIRE(j.contains("fixated"));
  REQUIRE(j.contains("warnings"));
  REQUIRE_THROWS_AS(bias_report(d, 0), Error);
}

TEST_CASE("dataset JSON round-trips", "[dataset]") {
  const auto d = make_dataset(8, 3);
  const auto back = dataset_from_json(nlohmann::json::parse(dataset_to_json(d).dump()));
  REQUIRE(back.space == d.space);
  REQUIRE(back.records == d.records);
}

TEST_CASE("clean policy names parse", "[dataset]") {
  REQUIRE(parse_clean_policy("discard_incomplete") == CleanPolicy::DiscardIncomplete);
  REQUIRE(parse_clean_policy("discard") == CleanPolicy::DiscardIncomplete);
  REQUIRE(parse_clean_policy("impute_median") == CleanPolicy::ImputeMedian);
  REQUIRE(parse_clean_policy("impute") == CleanPolicy::ImputeMedian);
  REQUIRE_FALSE(parse_clean_policy("drop"));
}
