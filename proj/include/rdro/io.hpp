#pragma once

// JSON for functions, programs and problem specs. Numbers are written with
// 12 significant digits; infinities as the strings "inf" / "-inf".

#include "rdro/ot.hpp"

#include "json.hpp"

#include <optional>
#include <string>

namespace rdro::io {

using json = nlohmann::json;

constexpr int kSchemaVersion = 1;

json num(double x);
double to_double(const json& j, const std::string& path);
json vec_json(const Vec& v);
Vec vec_from(const json& j, const std::string& path);
json mat_json(const Mat& A);  // sparse triplets
Mat mat_from(const json& j, const std::string& path, long rows = -1, long cols = -1);

json function_json(const FunctionExpr& f);
FunctionExpr function_from(const json& j, const std::string& path = "");

json program_json(const FiniteConvexProgram& P);
FiniteConvexProgram program_from(const json& j, const std::string& path = "");

std::string dump(const json& j);

enum class Kind { robust, uq_moment, uq_moment_generalized, uq_ot };
const char* kind_name(Kind k);

struct ProblemSpec {
  Kind kind = Kind::robust;
  RobustProblem robust;
  AmbiguitySet moment;
  Disutility g;
  GeneralizedAmbiguitySet generalized;
  OTAmbiguity ot;
  std::optional<OTDecision> decision;
  Tolerances tol;
  SolverOptions solver;
  json oracle = json::object();
  json verify = json::object();
  json raw;
};

ProblemSpec spec_from(const json& j);
ProblemSpec load_spec(const std::string& path);

}  // namespace rdro::io
