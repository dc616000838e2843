// rdro command line: reformulate | solve | verify | oracle <spec.json>
//
// exit codes: 0 ok, 1 other error, 2 schema, 3 unsupported, 4 solver failure,
// 5 invariant failure

#include "rdro/driver.hpp"

#include "CLI11.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>

using rdro::driver::json;

namespace {

struct Args {
  std::string spec, out, mode, suite;
  double tol_feas = 0, tol_opt = 0, grid_res = 0;
  std::uint64_t seed = 0;
};

void add_common(CLI::App* sub, Args& a) {
  sub->add_option("spec", a.spec, "problem spec (JSON); defaults to $RDRO_CONFIG");
  sub->add_option("-o,--out", a.out, "write the report here instead of stdout");
  sub->add_option("--tol-feas", a.tol_feas, "feasibility tolerance");
  sub->add_option("--tol-opt", a.tol_opt, "optimality tolerance");
  sub->add_option("--seed", a.seed, "random seed for the verification suites");
  sub->add_option("--grid-res", a.grid_res, "grid step for oracles");
  sub->add_option("--mode", a.mode, "primal, dual or both")->check(CLI::IsMember({"primal", "dual", "both"}));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"robust and distributionally robust reformulations"};
  app.require_subcommand(1);
  Args a;
  for (const char* name : {"reformulate", "solve", "verify", "oracle"}) {
    auto* sub = app.add_subcommand(name);
    add_common(sub, a);
    if (std::string(name) == "verify")
      sub->add_option("--suite", a.suite, "conjugates, duality or oracle")
          ->check(CLI::IsMember({"conjugates", "duality", "oracle"}));
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : rdro::driver::kSchema;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  if (a.spec.empty())
    if (const char* env = std::getenv("RDRO_CONFIG")) a.spec = env;
  if (a.spec.empty()) {
    std::cerr << "no spec given and RDRO_CONFIG is unset\n";
    return rdro::driver::kSchema;
  }

  rdro::driver::Options opt;
  const auto* sub = app.get_subcommands().front();
  if (sub->count("--tol-feas")) opt.feas_tol = a.tol_feas;
  if (sub->count("--tol-opt")) opt.opt_tol = a.tol_opt;
  if (sub->count("--grid-res")) opt.grid_res = a.grid_res;
  if (sub->count("--seed")) opt.seed = a.seed;
  opt.mode = a.mode;
  opt.suite = a.suite;

  rdro::driver::Outcome o;
  std::ifstream in(a.spec);
  if (!in) {
    o.code = rdro::driver::kSchema;
    o.report = {{"command", command}, {"error", {{"kind", "SchemaError"}, {"message", "cannot open " + a.spec}}}};
  } else {
    json spec;
    try {
      spec = json::parse(in);
      o = rdro::driver::run(command, spec, opt);
    } catch (const json::parse_error& e) {
      o.code = rdro::driver::kSchema;
      o.report = {{"command", command}, {"error", {{"kind", "SchemaError"}, {"message", std::string("/: ") + e.what()}}}};
    }
  }

  const std::string text = rdro::io::dump(o.report);
  if (a.out.empty()) {
    std::cout << text;
  } else {
    std::ofstream f(a.out);
    f << text;
  }
  if (o.report.contains("error")) std::cerr << o.report["error"]["message"].get<std::string>() << "\n";
  return o.code;
}
