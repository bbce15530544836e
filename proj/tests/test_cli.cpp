#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "symdirect/cli.hpp"

using namespace symdirect;

namespace {

std::string fixture(const std::string& name) { return std::string(SYMDIRECT_FIXTURES) + "/" + name; }

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("check exit codes") {
  CHECK(run({"check", fixture("rocket.ocp")}).code == 0);
  CHECK(run({"check", fixture("simple.ocp")}).code == 0);
  auto bad = run({"check", fixture("simple_bad_gauge.ocp")});
  CHECK(bad.code == 1);
  CHECK_THAT(bad.out, Catch::Matchers::ContainsSubstring("-s*u"));
  CHECK(run({"check", fixture("simple_nosym.ocp")}).code == 2);
  CHECK(run({"check", fixture("missing.ocp")}).code == 2);
}

TEST_CASE("usage errors") {
  CHECK(run({}).code == 2);
  CHECK(run({"solve"}).code == 2);
  CHECK(run({"solve", fixture("simple.ocp"), "--method", "magic"}).code == 2);
  CHECK(run({"solve", fixture("simple.ocp"), "--format", "xml"}).code == 2);
  CHECK(run({"--help"}).code == 0);
}

TEST_CASE("solve by each method") {
  for (const char* m : {"noether", "leitmann", "oracle"}) {
    auto r = run({"solve", fixture("simple.ocp"), "--method", m});
    CHECK(r.code == 0);
    CHECK_THAT(r.out, Catch::Matchers::ContainsSubstring("cost: "));
  }
  CHECK_THAT(run({"solve", fixture("simple.ocp")}).out, Catch::Matchers::ContainsSubstring("status: certified-global"));
  auto rocket = run({"solve", fixture("rocket.ocp"), "--method", "leitmann"});
  CHECK(rocket.code == 3);
  CHECK_THAT(rocket.err, Catch::Matchers::ContainsSubstring("n = m = 1"));
  CHECK(run({"solve", fixture("infeasible.ocp")}).code == 3);
}

TEST_CASE("json output parses and is deterministic") {
  auto a = run({"solve", fixture("rocket.ocp"), "--format", "json"});
  auto b = run({"solve", fixture("rocket.ocp"), "--format", "json"});
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  auto j = nlohmann::json::parse(a.out);
  REQUIRE(j.is_array());
  REQUIRE(j.size() == 2);
  CHECK(j[0]["exact_cost"] == "4");
  CHECK(j[0]["controls"]["u"] == "-2");

  auto c1 = run({"check", fixture("rocket.ocp"), "--format", "json", "--seed", "3"});
  CHECK(nlohmann::json::parse(c1.out)["invariant"] == true);
}

TEST_CASE("output directory receives json and csv") {
  const auto dir = std::filesystem::temp_directory_path() / "symdirect_cli_test";
  std::filesystem::remove_all(dir);
  REQUIRE(run({"solve", fixture("rocket.ocp"), "--out", dir.string(), "--mesh", "10"}).code == 0);
  CHECK(std::filesystem::exists(dir / "noether.json"));
  const auto csv = slurp(dir / "noether_0.csv");
  CHECK(csv.rfind("t,x1,x2,u\n0,-1,2,-2\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 12);

  REQUIRE(run({"solve", fixture("simple.ocp"), "--method", "oracle", "--out", dir.string(), "--mesh", "4"}).code == 0);
  CHECK(slurp(dir / "oracle.csv").rfind("t,x,u\n", 0) == 0);
  CHECK(nlohmann::json::parse(slurp(dir / "oracle.json"))["N"] == 4);
  std::filesystem::remove_all(dir);
}

TEST_CASE("csv to stdout") {
  auto r = run({"solve", fixture("simple.ocp"), "--format", "csv", "--mesh", "2"});
  CHECK(r.code == 0);
  CHECK(r.out == "t,x,u\n0,0,1\n0.5,0.5,1\n1,1,1\n");
  CHECK(run({"solve", fixture("simple_symbolic.ocp"), "--format", "csv"}).code == 2);
}

TEST_CASE("compare") {
  auto simple = run({"compare", fixture("simple.ocp")});
  CHECK(simple.code == 0);
  CHECK_THAT(simple.out, Catch::Matchers::ContainsSubstring("agree within"));

  // The rocket leaves x2(t0) free; the oracle finds a cheaper trajectory.
  auto rocket = run({"compare", fixture("rocket.ocp"), "--format", "json"});
  CHECK(rocket.code == 1);
  auto j = nlohmann::json::parse(rocket.out);
  CHECK(j["methods"][1]["cost"].is_null());
  CHECK(std::abs(j["methods"][2]["cost"].get<double>() - 3.0) < 1e-3);

  CHECK(run({"compare", fixture("rocket_pinned.ocp")}).code == 0);
  CHECK(run({"compare", fixture("infeasible.ocp")}).code == 3);
  CHECK(run({"compare", fixture("simple_symbolic.ocp")}).code == 2);
}

TEST_CASE("gauge and symmetry search") {
  auto g = run({"gauge", fixture("rocket.ocp")});
  CHECK(g.code == 0);
  CHECK(g.out == "gauge = s^4*t + 2*s^2*x2\n");
  auto f = run({"find-symmetry", fixture("simple.ocp"), "--format", "json"});
  CHECK(f.code == 0);
  auto j = nlohmann::json::parse(f.out);
  REQUIRE(j.size() == 1);
  CHECK(j[0]["gauge"] == "s^2*t + 2*s*x");
  CHECK(run({"gauge", fixture("simple_nosym.ocp")}).code == 2);
}
