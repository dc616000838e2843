#include "common.hpp"

using namespace t;

namespace {

const char* kFixtures[] = {"gap.json",     "unbounded_dual.json", "robust_box.json", "moment_z.json",
                           "moment_abs.json", "ot_abs.json",      "ot_escape.json",  "ot_decision.json",
                           "generalized.json"};

}  // namespace

TEST_CASE("reformulate, parse and re-emit is byte-identical") {
  for (const char* name : kFixtures) {
    INFO(name);
    driver::Options o;
    o.mode = "both";
    const auto spec = load(name);
    if (spec.value("kind", "") == "uq_ot" && spec.contains("decision")) o.mode = "primal";
    const auto out = driver::reformulate(spec, o);
    REQUIRE(out.code == 0);
    std::vector<io::json> progs;
    if (out.report.contains("programs"))
      for (const auto& p : out.report["programs"]) progs.push_back(p);
    else
      progs.push_back(out.report);
    REQUIRE(!progs.empty());
    for (const auto& j : progs) {
      const auto P = io::program_from(j);
      CHECK(io::dump(io::program_json(P)) == io::dump(j));
    }
  }
}

TEST_CASE("functions round-trip") {
  for (const auto& [name, f] : driver::shipped_atoms()) {
    INFO(name);
    const auto j = io::function_json(f);
    CHECK(io::dump(io::function_json(io::function_from(j, "/f"))) == io::dump(j));
  }
}

TEST_CASE("schema errors carry a pointer") {
  try {
    io::spec_from(load("malformed.json"));
    FAIL("no throw");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::SchemaError);
    CHECK(e.message().rfind("/moments/0/mu", 0) == 0);
  }
  const auto bad = io::json::parse(R"({"kind":"uq_moment","support":{"dim":1},"neg_pieces":[{"kind":"bogus"}]})");
  try {
    io::spec_from(bad);
    FAIL("no throw");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::SchemaError);
    CHECK(e.message().find("/neg_pieces/0") != std::string::npos);
  }
  CHECK_THROWS_AS(io::spec_from(io::json::parse(R"({"kind":"nope"})")), Error);
}

TEST_CASE("numbers print with twelve significant digits") {
  io::json j = {{"b", io::num(1.0 / 3.0)}, {"a", io::num(INFINITY)}};
  const auto s = io::dump(j);
  CHECK(s.find("0.333333333333") != std::string::npos);
  CHECK(s.find("0.3333333333333") == std::string::npos);
  CHECK(s.find("\"a\"") < s.find("\"b\""));
  CHECK(s.find("\"inf\"") != std::string::npos);
}

TEST_CASE("driver exit codes") {
  CHECK(driver::exit_code_for(ErrorKind::SchemaError) == 2);
  CHECK(driver::exit_code_for(ErrorKind::DimensionMismatch) == 2);
  CHECK(driver::exit_code_for(ErrorKind::UnsupportedComposition) == 3);
  CHECK(driver::exit_code_for(ErrorKind::AssumptionSViolated) == 3);
  CHECK(driver::exit_code_for(ErrorKind::SolverFailure) == 4);
  CHECK(driver::run("solve", load("malformed.json")).code == 2);
  CHECK(driver::run("solve", load("unsupported.json")).code == 3);
  driver::Options o;
  o.mode = "primal";
  CHECK(driver::run("solve", load("starved_solver.json"), o).code == 4);
  o.suite = "conjugates";
  CHECK(driver::run("verify", load("corrupt_pair.json"), o).code == 5);
  CHECK(driver::run("frobnicate", load("gap.json")).code != 0);
}

TEST_CASE("solve reports") {
  const auto r = driver::solve(load("gap.json")).report;
  CHECK(r["verdict"] == "weak_only");
  const auto ot = driver::solve(load("ot_abs.json")).report;
  CHECK(ot["value"].get<double>() == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(ot.contains("distribution"));
}
