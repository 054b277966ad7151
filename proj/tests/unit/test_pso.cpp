#include <catch_amalgamated.hpp>

#include <set>

#include "kilnloop/error.hpp"
#include "kilnloop/pso.hpp"
#include "kilnloop/virtual_lab.hpp"

using namespace kilnloop;

namespace {

DesignSpace line_space() { return DesignSpace("line", 1, {{"x", Continuous{0, 10, 1, ""}}}); }

TrainedModel parabola_model() {
  Dataset d{line_space(), {}};
  for (int x = 0; x <= 10; ++x) {
    ExperimentRecord r;
    r.id = "X" + std::to_string(x);
    r.point.values = {{"x", static_cast<double>(x)}};
    r.discharge_capacity = -(x - 7.0) * (x - 7.0);
    d.records.push_back(r);
  }
  return train(ModelSpec{Algorithm::DT, DtParams{0, 2}, 0}, d);
}

TrainedModel lab_model(std::uint64_t seed) {
  const auto history = lab::generate_history(lab::OracleConfig{}, 120, seed);
  return train(ModelSpec{Algorithm::GBM, GbmHyperParams{0.8, 80, 4, 0.1, 2}, seed},
               clean(history, CleanPolicy::DiscardIncomplete));
}

PsoConfig small_config(std::uint64_t seed) {
  PsoConfig c;
  c.n_particles = 30;
  c.n_iterations = 60;
  c.seed = seed;
  return c;
}

double x_of(const Candidate& c) { return std::get<double>(c.point.values.at("x")); }

}  // namespace

TEST_CASE("swarm finds the peak of a parabola", "[pso]") {
  const auto model = parabola_model();
  PsoStats stats;
  const auto top = optimize(model, line_space(), small_config(1), 3, {}, &stats);
  REQUIRE(top.size() == 3);
  REQUIRE(x_of(top[0]) == 7.0);
  REQUIRE(top[0].predicted_capacity == 0.0);
  REQUIRE(top[0].rank == 1);
  REQUIRE(x_of(top[1]) == 6.0);
  REQUIRE(x_of(top[2]) == 8.0);
  REQUIRE(stats.evaluations == 30u * 61u);
  REQUIRE(stats.distinct_points <= 11);
}

TEST_CASE("exclusions remove grid points from the selection", "[pso]") {
  const auto model = parabola_model();
  const auto space = line_space();
  const ExclusionSet ex{space.linear_key(space.index_of(DesignPoint{{{"x", 7.0}}}))};
  const auto top = optimize(model, space, small_config(2), 2, ex);
  REQUIRE(x_of(top[0]) == 6.0);
  REQUIRE(x_of(top[1]) == 8.0);

  ExclusionSet all;
  for (std::uint64_t k = 0; k < 11; ++k) all.insert(k);
  try {
    (void)optimize(model, space, small_config(2), 2, all);
    FAIL("expected InfeasibleSpace");
  } catch (const Error& e) {
    REQUIRE(e.code() == ErrorCode::InfeasibleSpace);
  }
}

TEST_CASE("brute force ranks the whole grid", "[pso]") {
  const auto model = parabola_model();
  const auto top = brute_force(model, line_space(), 4, 1000);
  REQUIRE(top.size() == 4);
  REQUIRE(x_of(top[0]) == 7.0);
  REQUIRE(x_of(top[1]) == 6.0);
  REQUIRE(x_of(top[2]) == 8.0);
  REQUIRE(x_of(top[3]) == 5.0);

  const auto everything = brute_force(model, line_space(), 50, 1000);
  REQUIRE(everything.size() == 11);
  for (std::size_t i = 0; i < everything.size(); ++i) REQUIRE(everything[i].rank == static_cast<int>(i) + 1);

  REQUIRE_THROWS_AS(brute_force(model, line_space(), 4, 5), Error);
}

TEST_CASE("brute force on a six-point space", "[pso]") {
  const DesignSpace space("six", 1, {{"a", Continuous{0, 2, 1, ""}}, {"b", Categorical{{"p", "q"}}}});
  Dataset d{space, {}};
  int i = 0;
  for (const auto& p : enumerate_grid(space, 10)) {
    ExperimentRecord r;
    r.id = "S" + std::to_string(i);
    r.point = p;
    const double a = std::get<double>(p.values.at("a"));
    const bool q = std::get<std::string>(p.values.at("b")) == "q";
    r.discharge_capacity = 10.0 * a + (q ? 5.0 : 0.0);
    d.records.push_back(r);
    ++i;
  }
  const auto model = train(ModelSpec{Algorithm::DT, DtParams{0, 2}, 0}, d);
  const auto top = brute_force(model, space, 6, 100);
  REQUIRE(top.size() == 6);
  REQUIRE(top[0].predicted_capacity == 25.0);
  REQUIRE(std::get<std::string>(top[0].point.values.at("b")) == "q");
  const auto swarm = optimize(model, space, small_config(4), 6);
  REQUIRE(swarm.size() == 6);
  for (std::size_t r = 0; r < 6; ++r) REQUIRE(swarm[r].predicted_capacity == top[r].predicted_capacity);
}

TEST_CASE("swarm proposals are valid, distinct, ranked and reproducible", "[pso]") {
  const auto model = lab_model(3);
  const auto space = lab::benchmark_space();
  const auto a = optimize(model, space, small_config(9), 10);
  const auto b = optimize(model, space, small_config(9), 10);
  REQUIRE(a == b);
  REQUIRE(a.size() == 10);
  std::set<std::uint64_t> keys;
  for (std::size_t i = 0; i < a.size(); ++i) {
    REQUIRE(validate_point(space, a[i].point).ok());
    REQUIRE(keys.insert(space.linear_key(space.index_of(a[i].point))).second);
    REQUIRE(predict(model, {a[i].point}).front() == a[i].predicted_capacity);
    if (i > 0) REQUIRE(a[i - 1].predicted_capacity >= a[i].predicted_capacity);
  }
  const auto best = brute_force(model, space, 1, 100000);
  REQUIRE(a[0].predicted_capacity <= best[0].predicted_capacity);

  const auto sheet = candidates_csv(space, a, 3);
  REQUIRE(sheet.rfind("iteration,rank,predicted_capacity", 0) == 0);
  REQUIRE(std::count(sheet.begin(), sheet.end(), '\n') == 11);
}

TEST_CASE("swarm rejects a mismatched space and bad configs", "[pso]") {
  const auto model = parabola_model();
  try {
    (void)optimize(model, lab::benchmark_space(), small_config(1));
    FAIL("expected SpaceMismatch");
  } catch (const Error& e) {
    REQUIRE(e.code() == ErrorCode::SpaceMismatch);
  }
  auto bad = small_config(1);
  bad.n_particles = 0;
  REQUIRE_THROWS_AS(bad.validate(), Error);
  bad = small_config(1);
  bad.v_max_fraction = 0.0;
  REQUIRE_THROWS_AS(bad.validate(), Error);

  const auto c = small_config(77);
  REQUIRE(PsoConfig::from_json(nlohmann::json::parse(c.to_json().dump())) == c);
  auto j = nlohmann::json::parse(c.to_json().dump());
  j["warp"] = 9;
  REQUIRE_THROWS_AS(PsoConfig::from_json(j), Error);
}
