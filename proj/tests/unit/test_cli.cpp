#include <catch_amalgamated.hpp>

#include <filesystem>

#include "kilnloop/campaign.hpp"
#include "kilnloop/cli.hpp"
#include "kilnloop/virtual_lab.hpp"

using namespace kilnloop;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("kilnloop_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int run(std::initializer_list<std::string> args) { return cli::run(std::vector<std::string>(args)); }

std::string s(const fs::path& p) { return p.string(); }

}  // namespace

TEST_CASE("offline workflow from CSV to a closed iteration", "[cli]") {
  const auto dir = fresh_dir("workflow");
  const lab::OracleConfig oracle;
  write_file_atomic(s(dir / "history.csv"), to_csv(lab::generate_history(oracle, 100, 2)));
  write_file_atomic(s(dir / "space.json"), oracle.space.to_json().dump(1));

  REQUIRE(run({"ingest", "--csv", s(dir / "history.csv"), "--space", s(dir / "space.json"), "--out",
               s(dir / "data.json")}) == cli::kOk);
  REQUIRE(run({"diagnose", "--dataset", s(dir / "data.json"), "--out", s(dir / "diag"), "--subgroup",
               std::string(lab::kNi)}) == cli::kOk);
  REQUIRE(fs::exists(dir / "diag" / "bias_report.json"));
  REQUIRE(fs::exists(dir / "diag" / ("hist_" + std::string(lab::kCoating) + ".csv")));

  REQUIRE(run({"tune", "--dataset", s(dir / "data.json"), "--trials", "2", "--seed", "4", "--out",
               s(dir / "tune")}) == cli::kOk);
  for (const char* f : {"best_spec.json", "trials.csv", "model.json", "metrics.json"})
    REQUIRE(fs::exists(dir / "tune" / f));
  REQUIRE(run({"train", "--dataset", s(dir / "data.json"), "--spec", s(dir / "tune" / "best_spec.json"),
               "--out", s(dir / "train")}) == cli::kOk);
  REQUIRE(TrainedModel::load(s(dir / "train" / "model.json")).spec() ==
          TrainedModel::load(s(dir / "tune" / "model.json")).spec());

  const auto state = s(dir / "state.json");
  REQUIRE(run({"init", "--dataset", s(dir / "data.json"), "--out", state, "--batch-size", "4", "--trials", "2",
               "--pso-particles", "15", "--pso-iterations", "20", "--seed", "9"}) == cli::kOk);
  REQUIRE(run({"propose", "--state", state, "--out", s(dir / "sheet.csv")}) == cli::kOk);
  REQUIRE(run({"propose", "--state", state, "--out", s(dir / "sheet2.csv")}) == cli::kUserError);
  REQUIRE(fs::exists(dir / "state.json.model.json"));

  write_file_atomic(s(dir / "results.csv"), measure_open_iteration(load_state(state), oracle));
  REQUIRE(run({"record", "--state", state, "--results", s(dir / "results.csv")}) == cli::kOk);
  REQUIRE(run({"record", "--state", state, "--results", s(dir / "results.csv")}) == cli::kUserError);
  REQUIRE(load_state(state).iterations.back().closed);

  REQUIRE(run({"report", "--state", state, "--kind", "iterations", "--out", s(dir / "it.json")}) == cli::kOk);
  REQUIRE(run({"report", "--state", state, "--kind", "scatter", "--out", s(dir / "scatter.csv")}) == cli::kOk);
  REQUIRE(run({"report", "--state", state, "--kind", "pie", "--out", s(dir / "x")}) == cli::kUserError);
  fs::remove_all(dir);
}

TEST_CASE("simulate is byte-reproducible and replayable", "[cli]") {
  const auto a = fresh_dir("sim_a"), b = fresh_dir("sim_b");
  for (const auto& d : {a, b})
    REQUIRE(run({"simulate", "--history", "80", "--iterations", "2", "--batch-size", "4", "--trials", "2",
                 "--pso-particles", "15", "--pso-iterations", "20", "--seed", "6", "--outdir", s(d)}) == cli::kOk);
  for (const char* f : {"state.json", "history.csv", "proposals_it1.csv", "results_it2.csv", "report.json",
                        "scatter.csv", "model.json"}) {
    REQUIRE(fs::exists(a / f));
    REQUIRE(read_file(s(a / f)) == read_file(s(b / f)));
  }
  REQUIRE(run({"replay", "--state", s(a / "state.json"), "--out", s(a / "replayed.json")}) == cli::kOk);
  REQUIRE(read_file(s(a / "replayed.json")) == read_file(s(a / "state.json")));
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("user errors exit with code 1", "[cli]") {
  const auto dir = fresh_dir("errors");
  REQUIRE(run({}) == cli::kUserError);
  REQUIRE(run({"bake"}) == cli::kUserError);
  REQUIRE(run({"simulate", "--iterations", "0", "--outdir", s(dir)}) == cli::kUserError);
  REQUIRE(run({"ingest", "--csv", s(dir / "none.csv"), "--space", s(dir / "none.json"), "--out",
               s(dir / "o.json")}) == cli::kUserError);
  REQUIRE(run({"tune", "--dataset", s(dir / "none.json"), "--algo", "svm", "--out", s(dir)}) == cli::kUserError);
  REQUIRE(run({"--help"}) == cli::kOk);
  fs::remove_all(dir);
}
