#pragma once

// Commands shared by the CLI and the Python module. Every entry point takes a
// spec as JSON and returns a report plus an exit code.

#include "rdro/io.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace rdro::driver {

using io::json;

// exit codes
constexpr int kOk = 0;
constexpr int kOtherError = 1;
constexpr int kSchema = 2;
constexpr int kUnsupported = 3;
constexpr int kSolverFailure = 4;
constexpr int kInvariant = 5;

int exit_code_for(ErrorKind k);

struct Options {
  std::optional<double> feas_tol, opt_tol, grid_res;
  std::optional<std::uint64_t> seed;
  std::string mode;   // primal | dual | both; empty picks the per-kind default
  std::string suite;  // conjugates | duality | oracle
};

struct Outcome {
  int code = kOk;
  json report;
};

Outcome reformulate(const json& spec, const Options& opt = {});
Outcome solve(const json& spec, const Options& opt = {});
Outcome verify(const json& spec, const Options& opt = {});
Outcome oracle(const json& spec, const Options& opt = {});

// dispatch by name; errors become {"error": {...}} with the mapped exit code
Outcome run(const std::string& command, const json& spec, const Options& opt = {});

// ---- suites, also used directly by the tests

struct CheckFailure {
  std::string check;  // "biconjugate check", "legendre dominance", ...
  std::string subject;
  std::string detail;
};

struct SuiteResult {
  bool pass = true;
  int checks = 0;
  double max_error = 0.0;
  std::vector<CheckFailure> failures;
  json details = json::object();
  json to_json() const;
};

// one small instance of every atom, 1-d or 2-d
std::vector<std::pair<std::string, FunctionExpr>> shipped_atoms();

struct ConjugateSuiteOptions {
  int points = 200;
  double biconj_tol = 1e-6;
  double legendre_tol = 1e-4;
  double window = 5.0;
  double step = 1e-3;  // halved per extra dimension up to 2e-2 in 2-d
  std::uint64_t seed = 7;
};

// f** = f on sampled points, grid Legendre below f* and equal where attained
SuiteResult conjugate_suite(const std::vector<std::pair<std::string, FunctionExpr>>& fns,
                            const ConjugateSuiteOptions& o = {});
// claimed pairs (f, f*): the conjugate of the claimed f* must give back f
SuiteResult conjugate_pair_suite(const std::vector<std::pair<std::string, std::pair<FunctionExpr, FunctionExpr>>>& pairs,
                                 const ConjugateSuiteOptions& o = {});

// random bi-affine robust problems over boxes with a strict Slater point built in
RobustProblem random_bi_affine_instance(std::uint64_t seed);
SuiteResult duality_suite(std::uint64_t seed, int instances, double gap_tol = 1e-4, const Tolerances& tol = {});

json distribution_json(const DiscreteDistribution& d);

}  // namespace rdro::driver
