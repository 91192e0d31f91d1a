#include "phonox/cli.hpp"
#include "phonox/error.hpp"
#include "phonox/io.hpp"

#include <doctest.h>

#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

using namespace phonox;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "phonox");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const auto d = fs::temp_directory_path() / ("phonox_cli_test_" + name);
  fs::remove_all(d);
  return d;
}

}  // namespace

TEST_CASE("usage errors exit with 1") {
  CHECK(run({}).code == 1);
  CHECK(run({"frobnicate"}).code == 1);
  CHECK(run({"metrics", "--no-such-flag", "1"}).code == 1);
  CHECK(run({"sweep", "nonsense"}).code == 1);
  CHECK(run({"--help"}).code == 0);
}

TEST_CASE("metrics writes run.json") {
  const auto dir = scratch("metrics");
  const auto r = run({"metrics", "--g-om", "430000", "--g-em", "6300000", "--kappa-o-i", "5e7", "--kappa-o-e", "5e7",
                      "--kappa-mu", "1e6", "--kappa-mu-e", "5e5", "--gamma-m", "5e4", "--n-c", "100", "--omega-o",
                      "1.95e14", "--output", dir.string()});
  CHECK(r.code == 0);
  const auto j = read_json(dir / "run.json");
  CHECK(j["kind"] == "metrics");
  CHECK(j["summary"]["C_em"].get<double>() > 0.0);
  CHECK(j["metadata"]["config_hash"].get<std::string>().size() == 16);
  fs::remove_all(dir);
}

TEST_CASE("invalid physics inputs are validation errors") {
  const auto dir = scratch("metrics_bad");
  CHECK(run({"metrics", "--kappa-mu", "1", "--kappa-mu-e", "2", "--output", dir.string()}).code == 1);
  CHECK(run({"metrics", "--output", dir.string()}).code == 1);  // gamma_m = 0
  CHECK(run({"metrics", "--g-om", "abc", "--output", dir.string()}).code == 1);
  fs::remove_all(dir);
}

TEST_CASE("dry run prints the resolved plan") {
  const auto r = run({"sweep", "pml", "--dry-run", "--A-points", "5"});
  REQUIRE(r.code == 0);
  const auto plan = nlohmann::json::parse(r.out);
  CHECK(plan["command"] == "sweep");
  CHECK(plan["kind"] == "pml");
  CHECK(plan["settings"]["A_points"] == 5);
}

TEST_CASE("run files") {
  const auto dir = scratch("runfile");
  fs::create_directories(dir);
  const nlohmann::json rf = {{"schema", kRunSchema},
                             {"command", "sweep"},
                             {"kind", "mesh"},
                             {"settings", {{"problem", "rod"}, {"resolutions", {8, 16, 32}},
                                           {"output", (dir / "out").string()}}}};
  write_json(rf, dir / "run.json");
  const auto loaded = RunFile::load(dir / "run.json");
  CHECK(loaded.command == "sweep");
  CHECK(loaded.kind == "mesh");
  CHECK(RunFile::from_json(loaded.to_json()).settings == loaded.settings);

  CHECK(run({"sweep", "--run", (dir / "run.json").string()}).code == 0);
  const auto out = read_json(dir / "out" / "run.json");
  CHECK(out["summary"]["order"].get<double>() == doctest::Approx(2.0).epsilon(0.15));
  CHECK(fs::exists(dir / "out" / "results.csv"));

  nlohmann::json bad = rf;
  bad["settings"]["colour"] = "blue";
  write_json(bad, dir / "bad.json");
  CHECK(run({"sweep", "--run", (dir / "bad.json").string()}).code == 1);
  fs::remove_all(dir);
}

TEST_CASE("settings resolution") {
  const auto d = default_settings("disorder");
  CHECK(d.contains("sigmas"));
  const auto s = resolve_settings("disorder", "", {{"samples", 5}}, {{"seed", 9}});
  CHECK(s["samples"] == 5);
  CHECK(s["seed"] == 9);
  CHECK_THROWS_AS(resolve_settings("disorder", "", {{"bogus", 1}}, nlohmann::json::object()), ValidationError);
  CHECK_THROWS_AS(resolve_settings("disorder", "", {{"samples", "many"}}, nlohmann::json::object()),
                  ValidationError);
  CHECK_THROWS_AS(resolve_settings("modes", "", {{"device", "no-such-device"}}, nlohmann::json::object()),
                  ValidationError);
  for (const auto& c : cli_commands()) {
    if (c == "sweep") {
      for (const auto& k : sweep_kinds()) CHECK(default_settings(c, k).contains("output"));
    } else {
      CHECK(default_settings(c).contains("output"));
    }
  }
}

TEST_CASE("modes command on a preset") {
  const auto dir = scratch("modes");
  CHECK(run({"modes", "--output", dir.string()}).code == 0);
  CHECK(fs::exists(dir / "run.json"));
  fs::remove_all(dir);
}
