#include "rdro/driver.hpp"

#include "rdro/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace rdro::driver {

using io::num;
using io::vec_json;

int exit_code_for(ErrorKind k) {
  switch (k) {
    case ErrorKind::SchemaError:
    case ErrorKind::InvalidArgument:
    case ErrorKind::DimensionMismatch:
    case ErrorKind::NonpositiveScale: return kSchema;
    case ErrorKind::UnsupportedComposition:
    case ErrorKind::UnsupportedCone:
    case ErrorKind::AssumptionSViolated:
    case ErrorKind::NotInDualCone:
    case ErrorKind::SingularBasis: return kUnsupported;
    case ErrorKind::SolverFailure:
    case ErrorKind::Inconclusive: return kSolverFailure;
    default: return kOtherError;
  }
}

json SuiteResult::to_json() const {
  json f = json::array();
  for (const auto& x : failures) f.push_back({{"check", x.check}, {"subject", x.subject}, {"detail", x.detail}});
  return {{"pass", pass}, {"checks", checks}, {"max_error", num(max_error)}, {"failures", f}, {"details", details}};
}

json distribution_json(const DiscreteDistribution& d) {
  json atoms = json::array();
  for (const auto& a : d.atoms) atoms.push_back(vec_json(a));
  json probs = json::array();
  for (double p : d.probs) probs.push_back(num(p));
  return {{"atoms", atoms}, {"probs", probs}};
}

namespace {

json ext_json(const ExtReal& v) {
  if (v.is_pos_inf()) return "inf";
  if (v.is_neg_inf()) return "-inf";
  return num(v.value());
}

struct Ctx {
  io::ProblemSpec S;
  Options opt;
  std::string mode;
};

Ctx make_ctx(const json& spec, const Options& opt, const char* default_mode) {
  Ctx c{io::spec_from(spec), opt, opt.mode.empty() ? default_mode : opt.mode};
  if (opt.feas_tol) c.S.tol.feas_tol = *opt.feas_tol;
  if (opt.opt_tol) c.S.tol.opt_tol = *opt.opt_tol;
  c.S.tol.validate();
  if (c.mode != "primal" && c.mode != "dual" && c.mode != "both")
    throw Error(ErrorKind::InvalidArgument, "--mode must be primal, dual or both");
  return c;
}

json head(const Ctx& c, const char* command) {
  return {{"schema_version", io::kSchemaVersion}, {"command", command}, {"kind", io::kind_name(c.S.kind)},
          {"mode", c.mode}};
}

json solution_json(const Solution& s) {
  return {{"status", status_name(s.status)}, {"value", ext_json(s.objective)}, {"iterations", s.iterations},
          {"max_violation", num(s.max_violation)}};
}

bool failed(const Solution& s) { return s.status == Status::stalled; }

Disutility checked_disutility(const Ctx& c, json& notes) {
  std::vector<std::string> warn;
  Disutility g = enforce_assumption_s(c.S.moment, c.S.g, &warn, c.S.tol);
  for (auto& w : warn) notes.push_back(w);
  return g;
}

std::vector<FiniteConvexProgram> programs_for(const Ctx& c, json& notes) {
  const auto& S = c.S;
  const bool p = c.mode != "dual", d = c.mode != "primal";
  std::vector<FiniteConvexProgram> out;
  switch (S.kind) {
    case io::Kind::robust:
      if (p) out.push_back(build_primal_worst_cvx(S.robust));
      if (d) out.push_back(build_dual_best_cvx(S.robust));
      break;
    case io::Kind::uq_moment: {
      Disutility g = checked_disutility(c, notes);
      if (p) out.push_back(build_apw_cvx(S.moment, g));
      if (d) out.push_back(build_adb_cvx(S.moment, g));
      break;
    }
    case io::Kind::uq_moment_generalized:
      if (p) out.push_back(build_apw_cvx_g(S.generalized));
      if (d) out.push_back(build_adb_cvx_g(S.generalized));
      break;
    case io::Kind::uq_ot:
      if (S.decision) {
        if (d) throw Error(ErrorKind::UnsupportedComposition, "decision problems have no explicit dual program");
        out.push_back(build_ot_primal_cvx(S.ot, *S.decision));
      } else {
        if (p) out.push_back(build_ot_primal_cvx(S.ot, S.g));
        if (d) out.push_back(build_ot_dual_cvx_explicit(S.ot, S.g));
      }
      break;
  }
  return out;
}

const char* default_reformulate_mode(const json& spec) {
  const json* k = spec.is_object() && spec.contains("kind") ? &spec["kind"] : nullptr;
  if (k && k->is_string() && k->get<std::string>() == "uq_ot" && !spec.contains("decision")) return "dual";
  return "primal";
}

// ---------------------------------------------------------------- solve

Outcome solve_robust(const Ctx& c) {
  Outcome o{kOk, head(c, "solve")};
  const auto& R = c.S.robust;
  if (c.mode == "both") {
    DualityReport d = duality_report(R, c.S.tol);
    o.report["pw"] = ext_json(d.pw_value);
    o.report["db"] = ext_json(d.db_value);
    o.report["value"] = ext_json(d.pw_value);
    o.report["gap"] = num(d.gap);
    o.report["verdict"] = verdict_name(d.verdict);
    o.report["pw_status"] = status_name(d.pw_status);
    o.report["db_status"] = status_name(d.db_status);
    o.report["slater_primal"] = slater_flag_name(d.slater_primal);
    o.report["slater_dual"] = slater_flag_name(d.slater_dual);
    o.report["z_bounded"] = d.z_bounded;
    o.report["notes"] = d.notes;
    if (d.pw_status == Status::stalled || d.db_status == Status::stalled) o.code = kSolverFailure;
    return o;
  }
  FiniteConvexProgram P = c.mode == "primal" ? build_primal_worst_cvx(R) : build_dual_best_cvx(R);
  Solution s = solve(P, c.S.tol, c.S.solver);
  o.report["provenance"] = P.provenance;
  o.report["solution"] = solution_json(s);
  o.report["value"] = ext_json(s.objective);
  if (c.mode == "primal" && s.solved()) o.report["x"] = vec_json(s.value("x"));
  if (c.mode == "dual" && s.solved()) {
    ProbeResult pr = unboundedness_probe(P, 1e6, c.S.tol);
    o.report["feasible_region"] = pr.kind == ProbeResult::Kind::unbounded ? "unbounded"
                                  : pr.kind == ProbeResult::Kind::bounded ? "bounded"
                                                                          : "inconclusive";
  }
  if (failed(s)) o.code = kSolverFailure;
  return o;
}

json check_distribution(const AmbiguitySet& A, const Disutility& g, const DiscreteDistribution& d,
                        const Tolerances& tol) {
  json r;
  bool ok = true;
  try {
    d.validate(&A.support, tol.feas_tol);
  } catch (const Error& e) {
    ok = false;
    r["support_error"] = e.what();
  }
  json mom = json::array();
  for (const auto& m : A.moments) {
    ExtReal e = d.expect_convex(m.h);
    mom.push_back(ext_json(e));
    if (!e.is_finite() || e.value() > m.mu + std::max(tol.feas_tol, 1e-6)) ok = false;
  }
  r["moments"] = mom;
  r["expectation"] = ext_json(d.expect(g));
  r["feasible"] = ok;
  return r;
}

Outcome solve_moment(const Ctx& c) {
  Outcome o{kOk, head(c, "solve")};
  json notes = json::array();
  Disutility g = checked_disutility(c, notes);
  const auto& A = c.S.moment;
  if (c.mode != "dual") {
    Solution s = solve(build_apw_cvx(A, g), c.S.tol, c.S.solver);
    o.report["primal"] = solution_json(s);
    o.report["value"] = ext_json(s.objective);
    if (failed(s)) o.code = kSolverFailure;
  }
  if (c.mode != "primal") {
    FiniteConvexProgram adb = build_adb_cvx(A, g);
    Solution s = solve(adb, c.S.tol, c.S.solver);
    o.report["dual"] = solution_json(s);
    o.report["value"] = ext_json(s.objective);
    if (failed(s)) o.code = kSolverFailure;
    if (s.solved()) {
      DiscreteDistribution d = extract_distribution(A, g, adb, s.x, c.S.tol);
      o.report["distribution"] = distribution_json(d);
      o.report["distribution_check"] = check_distribution(A, g, d, c.S.tol);
    }
  }
  if (c.mode == "both" && o.report["primal"]["value"].is_number() && o.report["dual"]["value"].is_number())
    o.report["gap"] = num(o.report["primal"]["value"].get<double>() - o.report["dual"]["value"].get<double>());
  o.report["notes"] = notes;
  return o;
}

Outcome solve_generalized(const Ctx& c) {
  Outcome o{kOk, head(c, "solve")};
  const auto& G = c.S.generalized;
  if (c.mode != "dual") {
    Solution s = solve(build_apw_cvx_g(G), c.S.tol, c.S.solver);
    o.report["primal"] = solution_json(s);
    o.report["value"] = ext_json(s.objective);
    if (failed(s)) o.code = kSolverFailure;
  }
  if (c.mode != "primal") {
    Solution s = solve(build_adb_cvx_g(G), c.S.tol, c.S.solver);
    o.report["dual"] = solution_json(s);
    o.report["value"] = ext_json(s.objective);
    if (failed(s)) o.code = kSolverFailure;
  }
  return o;
}

json partition_json(const IndexPartition& p) {
  return {{"plus", p.plus}, {"zero", p.zero}, {"inf", p.inf}, {"has_escapes", p.has_escapes()}};
}

Outcome solve_ot(const Ctx& c) {
  Outcome o{kOk, head(c, "solve")};
  const auto& S = c.S;
  if (S.decision) {
    if (c.mode != "primal" && !c.opt.mode.empty())
      throw Error(ErrorKind::UnsupportedComposition, "decision problems are solved in primal mode only");
    FiniteConvexProgram P = build_ot_primal_cvx(S.ot, *S.decision);
    Solution s = solve(P, S.tol, S.solver);
    o.report["mode"] = "primal";
    o.report["provenance"] = P.provenance;
    o.report["primal"] = solution_json(s);
    o.report["value"] = ext_json(s.objective);
    if (s.solved() && S.decision->dim > 0) o.report["x"] = vec_json(s.value("x"));
    if (failed(s)) o.code = kSolverFailure;
    return o;
  }
  if (c.mode != "dual") {
    Solution s = solve(build_ot_primal_cvx(S.ot, S.g), S.tol, S.solver);
    o.report["primal"] = solution_json(s);
    o.report["value"] = ext_json(s.objective);
    if (failed(s)) o.code = kSolverFailure;
  }
  if (c.mode == "primal") return o;

  OTSolve r = solve_ot_explicit(S.ot, S.g, S.tol, S.solver);
  o.report["dual"] = solution_json(r.solution);
  o.report["value"] = ext_json(r.solution.objective);
  o.report["polished"] = r.polished;
  o.report["identity_of_indiscernibles"] = r.solvable_flag;
  o.report["slater_dual"] = slater_flag_name(ot_slater_flag(r.program, S.ot.num_atoms(), S.g.size(), S.tol));
  if (o.report.contains("primal") && o.report["primal"]["value"].is_number() && r.solution.solved() &&
      r.solution.objective.is_finite())
    o.report["gap"] = num(o.report["primal"]["value"].get<double>() - r.solution.objective.value());
  o.report["notes"] = r.notes;
  if (failed(r.solution)) o.code = kSolverFailure;
  if (!r.solution.solved()) return o;

  OTPoint pt = read_ot_point(r.program, r.solution.x, S.ot.num_atoms(), S.g.size());
  IndexPartition part = classify_indices(S.ot, pt, S.tol);
  o.report["partition"] = partition_json(part);
  if (!part.has_escapes()) {
    DiscreteDistribution d = optimal_distribution(S.ot, pt, S.tol);
    o.report["distribution"] = distribution_json(d);
    o.report["expectation"] = ext_json(d.expect(S.g));
    o.report["transport_cost"] = num(ot_plan_cost(S.ot, pt, 0, S.tol));
  } else {
    json fam = json::array();
    for (int n : {1, 2, 4, 8, 16}) {
      DiscreteDistribution d = asymptotic_distribution(S.ot, pt, n, S.tol);
      fam.push_back({{"n", n},
                     {"distribution", distribution_json(d)},
                     {"expectation", ext_json(d.expect(S.g))},
                     {"transport_cost", num(ot_plan_cost(S.ot, pt, n, S.tol))}});
    }
    o.report["asymptotic_family"] = fam;
  }
  return o;
}

// ---------------------------------------------------------------- oracle

struct Window {
  Vec lo, hi;
};

double oracle_num(const Ctx& c, const char* key, double dflt) {
  if (c.S.oracle.is_object() && c.S.oracle.contains(key)) return io::to_double(c.S.oracle[key], std::string("/oracle/") + key);
  return dflt;
}

// oracle.window, else the set's box clipped to +-oracle.extent around the anchor
Window window_for(const Ctx& c, const json* set_json, int dim, const Vec& anchor) {
  if (c.S.oracle.is_object() && c.S.oracle.contains("window")) {
    const json& w = c.S.oracle["window"];
    Window out{io::vec_from(w.at("lo"), "/oracle/window/lo"), io::vec_from(w.at("hi"), "/oracle/window/hi")};
    check_dim(out.lo.size(), dim, "oracle window");
    check_dim(out.hi.size(), dim, "oracle window");
    return out;
  }
  const double ext = oracle_num(c, "extent", 10.0);
  Window out{anchor.array() - ext, anchor.array() + ext};
  if (set_json && set_json->is_object() && set_json->contains("box")) {
    Vec lo = io::vec_from((*set_json)["box"]["lo"], "/box/lo"), hi = io::vec_from((*set_json)["box"]["hi"], "/box/hi");
    for (int d = 0; d < dim; ++d) {
      if (std::isfinite(lo[d])) out.lo[d] = lo[d];
      if (std::isfinite(hi[d])) out.hi[d] = hi[d];
    }
  }
  return out;
}

double grid_step(const Ctx& c, int dim) {
  if (c.opt.grid_res) return *c.opt.grid_res;
  return oracle_num(c, "grid_res", dim == 1 ? 1e-3 : 1e-2);
}

json grid_result_json(const GridLPResult& r) {
  json pts = json::array();
  for (const auto& p : r.points) pts.push_back(vec_json(p));
  json m = json::array();
  for (double x : r.masses) m.push_back(num(x));
  return {{"value", num(r.value)}, {"points", pts}, {"masses", m}, {"source", r.source}};
}

// grid reference value for the spec, plus the point where robust problems are evaluated
json run_oracle(const Ctx& c, const Vec* x_robust) {
  const auto& S = c.S;
  switch (S.kind) {
    case io::Kind::uq_moment: {
      json notes = json::array();
      Disutility g = checked_disutility(c, notes);
      const int n = S.moment.dim();
      Window w = window_for(c, S.raw.contains("support") ? &S.raw["support"] : nullptr, n, Vec::Zero(n));
      auto grid = make_grid(w.lo, w.hi, grid_step(c, n));
      json r = grid_result_json(grid_worst_case_expectation(S.moment, g, grid, S.tol));
      r["grid_points"] = grid.size();
      return r;
    }
    case io::Kind::uq_ot: {
      if (S.decision) throw Error(ErrorKind::UnsupportedComposition, "no grid oracle for decision problems");
      const int n = S.ot.dim();
      Vec mean = Vec::Zero(n);
      for (int k = 0; k < S.ot.num_atoms(); ++k) mean += S.ot.nominal.probs[k] * S.ot.nominal.atoms[k];
      Window w = window_for(c, S.raw.contains("support") ? &S.raw["support"] : nullptr, n, mean);
      auto grid = make_grid(w.lo, w.hi, grid_step(c, n));
      json r = grid_result_json(grid_worst_case_expectation(S.ot, S.g, grid, S.tol));
      r["grid_points"] = grid.size();
      return r;
    }
    case io::Kind::robust: {
      const auto& f = S.robust.objective;
      Vec x;
      if (S.oracle.is_object() && S.oracle.contains("x")) x = io::vec_from(S.oracle["x"], "/oracle/x");
      else if (x_robust) x = *x_robust;
      else {
        Solution s = solve(build_primal_worst_cvx(S.robust), S.tol, S.solver);
        if (!s.solved()) throw Error(ErrorKind::SolverFailure, "primal solve failed; pass oracle.x");
        x = s.value("x");
      }
      check_dim(x.size(), f.dim_x(), "oracle x");
      const int n = f.dim_z();
      if (n == 0) return {{"value", ext_json(f.eval(x, Vec()))}, {"x", vec_json(x)}};
      const json* sj = nullptr;
      if (S.raw.contains("sets") && S.raw["sets"].is_array() && !S.raw["sets"].empty()) sj = &S.raw["sets"][0];
      Window w = window_for(c, sj, n, Vec::Zero(n));
      auto grid = make_grid(w.lo, w.hi, grid_step(c, n));
      return {{"value", num(grid_sup(f, x, S.robust.set(0), grid, S.tol.feas_tol))},
              {"x", vec_json(x)},
              {"grid_points", grid.size()}};
    }
    case io::Kind::uq_moment_generalized: break;
  }
  throw Error(ErrorKind::UnsupportedComposition, "no grid oracle for generalized ambiguity sets");
}

// ---------------------------------------------------------------- verify

void collect(const FunctionExpr& f, std::vector<std::pair<std::string, FunctionExpr>>& out, const std::string& name) {
  if (f.dim() >= 1 && f.dim() <= 2) out.emplace_back(name, f);
}

std::vector<std::pair<std::string, FunctionExpr>> spec_functions(const io::ProblemSpec& S) {
  std::vector<std::pair<std::string, FunctionExpr>> out;
  if (S.verify.is_object() && S.verify.contains("functions")) {
    const json& fs = S.verify["functions"];
    for (std::size_t i = 0; i < fs.size(); ++i)
      collect(io::function_from(fs[i], "/verify/functions/" + std::to_string(i)), out, "verify/functions/" + std::to_string(i));
    return out;
  }
  switch (S.kind) {
    case io::Kind::uq_moment:
      for (std::size_t j = 0; j < S.moment.moments.size(); ++j) collect(S.moment.moments[j].h, out, "moments/" + std::to_string(j) + "/h");
      for (std::size_t i = 0; i < S.g.neg_pieces.size(); ++i) collect(S.g.neg_pieces[i], out, "neg_pieces/" + std::to_string(i));
      break;
    case io::Kind::uq_ot:
      collect(S.ot.cost.displacement, out, "cost");
      for (std::size_t i = 0; i < S.g.neg_pieces.size(); ++i) collect(S.g.neg_pieces[i], out, "neg_pieces/" + std::to_string(i));
      break;
    case io::Kind::robust:
      for (int i = 0; i <= S.robust.num_constraints(); ++i) {
        collect(S.robust.fn(i).p, out, "f" + std::to_string(i) + "/p");
        collect(S.robust.fn(i).neg_q, out, "f" + std::to_string(i) + "/neg_q");
      }
      break;
    case io::Kind::uq_moment_generalized:
      for (std::size_t k = 0; k < S.generalized.components.size(); ++k)
        for (std::size_t i = 0; i < S.generalized.components[k].neg_pieces.size(); ++i)
          collect(S.generalized.components[k].neg_pieces[i], out,
                  "components/" + std::to_string(k) + "/neg_pieces/" + std::to_string(i));
      break;
  }
  return out;
}

Outcome verify_conjugates(const Ctx& c) {
  Outcome o{kOk, head(c, "verify")};
  ConjugateSuiteOptions co;
  if (c.opt.seed) co.seed = *c.opt.seed;
  if (c.opt.grid_res) co.step = *c.opt.grid_res;
  auto fns = spec_functions(c.S);
  if (c.S.verify.is_object() && c.S.verify.value("shipped_atoms", false))
    for (auto& a : shipped_atoms()) fns.push_back(a);
  SuiteResult r = conjugate_suite(fns, co);
  if (c.S.verify.is_object() && c.S.verify.contains("conjugate_pairs")) {
    std::vector<std::pair<std::string, std::pair<FunctionExpr, FunctionExpr>>> pairs;
    const json& ps = c.S.verify["conjugate_pairs"];
    for (std::size_t i = 0; i < ps.size(); ++i) {
      const std::string p = "/verify/conjugate_pairs/" + std::to_string(i);
      pairs.push_back({ps[i].value("name", "pair " + std::to_string(i)),
                       {io::function_from(ps[i].at("f"), p + "/f"), io::function_from(ps[i].at("conjugate"), p + "/conjugate")}});
    }
    SuiteResult pr = conjugate_pair_suite(pairs, co);
    r.pass = r.pass && pr.pass;
    r.checks += pr.checks;
    r.max_error = std::max(r.max_error, pr.max_error);
    r.failures.insert(r.failures.end(), pr.failures.begin(), pr.failures.end());
    r.details["pairs"] = pr.details;
  }
  o.report["suite"] = "conjugates";
  o.report["result"] = r.to_json();
  if (!r.pass) o.code = kInvariant;
  return o;
}

Outcome verify_duality(const Ctx& c) {
  Outcome o{kOk, head(c, "verify")};
  const json& v = c.S.verify;
  const std::uint64_t seed = c.opt.seed ? *c.opt.seed : v.is_object() ? v.value("seed", std::uint64_t{1}) : 1;
  const int n = v.is_object() ? v.value("instances", 50) : 50;
  const double tol = v.is_object() && v.contains("gap_tol") ? io::to_double(v["gap_tol"], "/verify/gap_tol") : 1e-4;
  SuiteResult r = duality_suite(seed, n, tol, c.S.tol);
  if (c.S.kind == io::Kind::robust) {
    // the spec's own problem: weak duality always, a zero gap when certified
    DualityReport d = duality_report(c.S.robust, c.S.tol);
    r.details["spec"] = {{"pw", ext_json(d.pw_value)}, {"db", ext_json(d.db_value)}, {"gap", num(d.gap)},
                         {"verdict", verdict_name(d.verdict)}};
    ++r.checks;
    if (d.gap < -tol) {
      r.pass = false;
      r.failures.push_back({"weak duality", "spec", "db exceeds pw by " + std::to_string(-d.gap)});
    }
    if (d.verdict == Verdict::strong_duality_certified && std::abs(d.gap) > tol) {
      r.pass = false;
      r.failures.push_back({"strong duality", "spec", "certified instance with gap " + std::to_string(d.gap)});
    }
  }
  o.report["suite"] = "duality";
  o.report["seed"] = seed;
  o.report["result"] = r.to_json();
  if (!r.pass) o.code = kInvariant;
  return o;
}

Outcome verify_oracle(const Ctx& c) {
  Ctx cc = c;
  cc.mode = "both";
  if (c.S.kind == io::Kind::robust) cc.mode = "primal";
  Outcome so;
  switch (c.S.kind) {
    case io::Kind::robust: so = solve_robust(cc); break;
    case io::Kind::uq_moment: so = solve_moment(cc); break;
    case io::Kind::uq_ot: so = solve_ot(cc); break;
    case io::Kind::uq_moment_generalized:
      throw Error(ErrorKind::UnsupportedComposition, "no grid oracle for generalized ambiguity sets");
  }
  Outcome o{kOk, head(c, "verify")};
  o.report["suite"] = "oracle";
  o.report["solve"] = so.report;
  if (so.code != kOk) {
    o.code = so.code;
    return o;
  }
  Vec x;
  if (c.S.kind == io::Kind::robust && so.report.contains("x")) x = io::vec_from(so.report["x"], "/x");
  json orc = run_oracle(c, x.size() ? &x : nullptr);
  o.report["oracle"] = orc;
  SuiteResult r;
  const double ov = orc["value"].is_number() ? orc["value"].get<double>() : NAN;
  const double tol = std::max(1e-3, 1e-2 * std::abs(ov));
  auto cmp = [&](const char* what, const json& val) {
    ++r.checks;
    if (!val.is_number() || !std::isfinite(ov)) {
      r.pass = false;
      r.failures.push_back({"oracle agreement", what, "non-finite value"});
      return;
    }
    const double err = std::abs(val.get<double>() - ov);
    r.max_error = std::max(r.max_error, err);
    if (err > tol) {
      r.pass = false;
      r.failures.push_back({"oracle agreement", what, "off by " + std::to_string(err) + " (tol " + std::to_string(tol) + ")"});
    }
  };
  if (so.report.contains("primal")) cmp("primal", so.report["primal"]["value"]);
  if (so.report.contains("dual")) cmp("dual", so.report["dual"]["value"]);
  if (c.S.kind == io::Kind::robust) cmp("primal", so.report["value"]);
  r.details["tolerance"] = num(tol);
  o.report["result"] = r.to_json();
  if (!r.pass) o.code = kInvariant;
  return o;
}

}  // namespace

// ---------------------------------------------------------------- commands

Outcome reformulate(const json& spec, const Options& opt) {
  Ctx c = make_ctx(spec, opt, default_reformulate_mode(spec));
  json notes = json::array();
  auto progs = programs_for(c, notes);
  Outcome o;
  if (progs.size() == 1) {
    o.report = io::program_json(progs[0]);
  } else {
    o.report = {{"schema_version", io::kSchemaVersion}, {"programs", json::array()}};
    for (const auto& P : progs) o.report["programs"].push_back(io::program_json(P));
  }
  return o;
}

Outcome solve(const json& spec, const Options& opt) {
  Ctx c = make_ctx(spec, opt, "both");
  switch (c.S.kind) {
    case io::Kind::robust: return solve_robust(c);
    case io::Kind::uq_moment: return solve_moment(c);
    case io::Kind::uq_moment_generalized: return solve_generalized(c);
    case io::Kind::uq_ot: return solve_ot(c);
  }
  return {};
}

Outcome verify(const json& spec, const Options& opt) {
  Ctx c = make_ctx(spec, opt, "both");
  std::string suite = opt.suite;
  if (suite.empty() && c.S.verify.is_object()) suite = c.S.verify.value("suite", "");
  if (suite == "conjugates") return verify_conjugates(c);
  if (suite == "duality") return verify_duality(c);
  if (suite == "oracle") return verify_oracle(c);
  throw Error(ErrorKind::InvalidArgument, "--suite must be conjugates, duality or oracle");
}

Outcome oracle(const json& spec, const Options& opt) {
  Ctx c = make_ctx(spec, opt, "both");
  Outcome o{kOk, head(c, "oracle")};
  o.report["oracle"] = run_oracle(c, nullptr);
  return o;
}

Outcome run(const std::string& command, const json& spec, const Options& opt) {
  try {
    if (command == "reformulate") return reformulate(spec, opt);
    if (command == "solve") return solve(spec, opt);
    if (command == "verify") return verify(spec, opt);
    if (command == "oracle") return oracle(spec, opt);
    throw Error(ErrorKind::InvalidArgument, "unknown command '" + command + "'");
  } catch (const Error& e) {
    return {exit_code_for(e.kind()),
            {{"schema_version", io::kSchemaVersion},
             {"command", command},
             {"error", {{"kind", error_kind_name(e.kind())}, {"message", e.message()}}}}};
  } catch (const std::exception& e) {
    return {kOtherError,
            {{"schema_version", io::kSchemaVersion},
             {"command", command},
             {"error", {{"kind", "internal"}, {"message", e.what()}}}}};
  }
}

// ---------------------------------------------------------------- suites

std::vector<std::pair<std::string, FunctionExpr>> shipped_atoms() {
  auto v1 = [](double a) { return Vec::Constant(1, a); };
  auto v2 = [](double a, double b) {
    Vec v(2);
    v << a, b;
    return v;
  };
  std::vector<std::pair<std::string, FunctionExpr>> out = {
      {"affine", affine(v1(0.5), 1.0)},
      {"affine 2d", affine(v2(0.5, -1), 0.0)},
      {"indicator_singleton", indicator_singleton(v1(0.5))},
      {"indicator_box", indicator_box(v1(-1), v1(2))},
      {"indicator_box 2d", indicator_box(v2(-1, 0), v2(1, 2))},
      {"indicator_norm_ball l2", indicator_norm_ball(v2(0, 0), 1.5, Norm::l2)},
      {"indicator_norm_ball l1", indicator_norm_ball(v2(0.5, 0), 1.0, Norm::l1)},
      {"indicator_norm_ball linf", indicator_norm_ball(v2(0, 0), 1.0, Norm::linf)},
      {"norm_power p=1", norm_power(1, 1)},
      {"norm_power p=1.5", norm_power(1, 1.5)},
      {"norm_power p=2", norm_power(1, 2)},
      {"norm_power p=3", norm_power(1, 3)},
      {"norm_power p=inf", norm_power(1, INFINITY)},
      {"norm_power 2d l2 p=2", norm_power(2, 2, 0.5, Norm::l2)},
      {"norm_power 2d l1 p=1", norm_power(2, 1, 1.0, Norm::l1)},
      {"quad_over_lin", quad_over_lin(2)},
      {"exponential", exponential(1.0)},
      {"exponential s=0.5", exponential(0.5)},
      {"neg_log", neg_log()},
      {"neg_entropy", neg_entropy()},
      {"support_of_box", support_of_box(v1(-1), v1(0.5))},
  };
  return out;
}

namespace {

bool close_or_inf(const ExtReal& a, const ExtReal& b, double tol, double* err) {
  if (a.is_pos_inf() || b.is_pos_inf()) {
    *err = (a.is_pos_inf() && b.is_pos_inf()) ? 0.0 : INFINITY;
    return *err == 0.0;
  }
  if (!a.is_finite() || !b.is_finite()) {
    *err = INFINITY;
    return false;
  }
  *err = std::abs(a.value() - b.value());
  return *err <= tol;
}

std::string fmt(const ExtReal& v) { return to_string(v); }

std::string vec_str(const Vec& x) {
  std::string s = "(";
  for (int i = 0; i < x.size(); ++i) s += (i ? ", " : "") + std::to_string(x[i]);
  return s + ")";
}

// f** against f on random points
void biconjugate_check(const std::string& name, const FunctionExpr& f, const FunctionExpr& fss,
                       const ConjugateSuiteOptions& o, std::mt19937_64& rng, SuiteResult& r, json& d) {
  std::uniform_real_distribution<double> U(-3, 3);
  int finite = 0;
  double worst = 0;
  for (int k = 0; k < o.points; ++k) {
    Vec x(f.dim());
    for (int i = 0; i < x.size(); ++i) x[i] = U(rng);
    if (k < o.points / 4) x *= 0.1;  // denser near the origin, where most kinks sit
    ExtReal a = eval(f, x), b = eval(fss, x);
    if (a.is_finite()) ++finite;
    double err;
    ++r.checks;
    if (!close_or_inf(a, b, o.biconj_tol, &err)) {
      r.pass = false;
      r.failures.push_back({"biconjugate check", name, "f" + vec_str(x) + " = " + fmt(a) + ", f**" + vec_str(x) + " = " + fmt(b)});
      return;
    }
    worst = std::max(worst, err);
  }
  r.max_error = std::max(r.max_error, worst);
  d["biconjugate_max_error"] = num(worst);
  d["biconjugate_finite_points"] = finite;
}

// grid sup of w'x - f(x) below f*(w); equal when the grid maximizer is interior
void legendre_check(const std::string& name, const FunctionExpr& f, const FunctionExpr& fs,
                    const ConjugateSuiteOptions& o, std::mt19937_64& rng, SuiteResult& r, json& d) {
  const int n = f.dim();
  const double step = n == 1 ? o.step : std::max(o.step, 2e-2);
  Vec lo = Vec::Constant(n, -o.window), hi = Vec::Constant(n, o.window);
  auto grid = make_grid(lo, hi, step);
  const std::size_t cnt = n == 1 ? grid.size() : static_cast<std::size_t>(std::lround(std::sqrt(double(grid.size()))));
  std::vector<double> fv(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    ExtReal v = eval(f, grid[i]);
    fv[i] = v.is_finite() ? v.value() : INFINITY;
  }
  std::uniform_real_distribution<double> U(-2, 2);
  const int nw = n == 1 ? 40 : 12;
  int attained = 0;
  double worst = 0;
  for (int k = 0; k < nw; ++k) {
    Vec w(n);
    for (int i = 0; i < n; ++i) w[i] = U(rng);
    if (k == 0) w.setZero();
    double best = -INFINITY;
    std::size_t arg = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (!std::isfinite(fv[i])) continue;
      const double v = w.dot(grid[i]) - fv[i];
      if (v > best) best = v, arg = i;
    }
    if (!std::isfinite(best)) continue;
    ExtReal star = eval(fs, w);
    ++r.checks;
    const double dom_tol = 1e-6 * std::max(1.0, std::abs(best));
    if (!star.is_pos_inf() && (!star.is_finite() || best > star.value() + dom_tol)) {
      r.pass = false;
      r.failures.push_back({"legendre dominance", name,
                            "grid " + std::to_string(best) + " above f*" + vec_str(w) + " = " + fmt(star)});
      continue;
    }
    // compare only where the grid maximizer sits inside the window and inside dom f
    bool interior = true;
    for (int i = 0; i < n; ++i)
      interior = interior && grid[arg][i] > lo[i] + 2 * step && grid[arg][i] < hi[i] - 2 * step;
    if (interior) {
      const std::size_t stride[2] = {n == 1 ? 1 : cnt, 1};
      for (int i = 0; i < n && interior; ++i)
        interior = std::isfinite(fv[arg - stride[i]]) && std::isfinite(fv[arg + stride[i]]);
    }
    if (!interior || !star.is_finite()) continue;
    ++attained;
    const double err = std::abs(best - star.value());
    worst = std::max(worst, err);
    if (err > o.legendre_tol) {
      r.pass = false;
      r.failures.push_back({"legendre agreement", name,
                            "grid " + std::to_string(best) + " vs f*" + vec_str(w) + " = " + fmt(star)});
    }
  }
  r.max_error = std::max(r.max_error, worst);
  d["legendre_attained"] = attained;
  d["legendre_max_error"] = num(worst);
}

}  // namespace

SuiteResult conjugate_suite(const std::vector<std::pair<std::string, FunctionExpr>>& fns, const ConjugateSuiteOptions& o) {
  SuiteResult r;
  std::mt19937_64 rng(o.seed);
  for (const auto& [name, f] : fns) {
    json d;
    if (f.dim() < 1 || f.dim() > 2) {
      d["skipped"] = "grid checks are 1-d or 2-d";
      r.details[name] = d;
      continue;
    }
    FunctionExpr fs, fss;
    try {
      fs = conjugate(f).expr;
      fss = conjugate(fs).expr;
    } catch (const Error& e) {
      r.pass = false;
      r.failures.push_back({"conjugate", name, e.what()});
      continue;
    }
    biconjugate_check(name, f, fss, o, rng, r, d);
    legendre_check(name, f, fs, o, rng, r, d);
    r.details[name] = d;
  }
  return r;
}

SuiteResult conjugate_pair_suite(const std::vector<std::pair<std::string, std::pair<FunctionExpr, FunctionExpr>>>& pairs,
                                 const ConjugateSuiteOptions& o) {
  SuiteResult r;
  std::mt19937_64 rng(o.seed);
  for (const auto& [name, pr] : pairs) {
    const auto& [f, claimed] = pr;
    json d;
    check_dim(claimed.dim(), f.dim(), "conjugate pair");
    // (claimed f*)* must give back f
    biconjugate_check(name, f, conjugate(claimed).expr, o, rng, r, d);
    if (f.dim() <= 2) legendre_check(name, f, claimed, o, rng, r, d);
    r.details[name] = d;
  }
  return r;
}

RobustProblem random_bi_affine_instance(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> N(0, 1);
  std::uniform_real_distribution<double> U(0, 1);
  const int n = 1 + static_cast<int>(rng() % 2), m = 1 + static_cast<int>(rng() % 2), I = 1 + static_cast<int>(rng() % 2);
  auto randn = [&](int k) {
    Vec v(k);
    for (int i = 0; i < k; ++i) v[i] = N(rng);
    return v;
  };
  Vec lo(m), hi(m);
  for (int j = 0; j < m; ++j) lo[j] = -(0.5 + U(rng)), hi[j] = 0.5 + U(rng);
  Vec x0(n);
  for (int i = 0; i < n; ++i) x0[i] = 2 * U(rng) - 1;

  RobustProblem R;
  R.sets = {box_set(lo, hi)};
  Mat Q0(n, m);
  for (int i = 0; i < n; ++i) Q0.row(i) = randn(m).transpose();
  R.objective = bi_affine(randn(n), N(rng), Q0, randn(m));
  for (int i = 0; i < I; ++i) {
    Vec a = randn(n), c = randn(m);
    Mat Q(n, m);
    for (int r = 0; r < n; ++r) Q.row(r) = randn(m).transpose();
    const Vec s = Q.transpose() * x0 + c;
    double sup = 0;
    for (int j = 0; j < m; ++j) sup += std::max(lo[j] * s[j], hi[j] * s[j]);
    const double a0 = -(a.dot(x0) + sup) - (0.5 + 0.5 * U(rng));
    R.constraints.push_back(bi_affine(a, a0, Q, c));
  }
  // keep x bounded so both sides stay finite
  for (int i = 0; i < n; ++i)
    for (double sgn : {1.0, -1.0}) {
      Vec a = Vec::Zero(n);
      a[i] = sgn;
      R.constraints.push_back(bi_affine(a, -(std::abs(x0[i]) + 3), Mat::Zero(n, m), Vec::Zero(m)));
    }
  return R;
}

SuiteResult duality_suite(std::uint64_t seed, int instances, double gap_tol, const Tolerances& tol) {
  SuiteResult r;
  json gaps = json::array();
  for (int k = 0; k < instances; ++k) {
    const std::uint64_t s = seed * 1000003ULL + static_cast<std::uint64_t>(k);
    RobustProblem R = random_bi_affine_instance(s);
    DualityReport d = duality_report(R, tol);
    ++r.checks;
    const std::string subject = "instance " + std::to_string(k);
    if (d.slater_primal != SlaterFlag::strict) {
      r.pass = false;
      r.failures.push_back({"strict Slater point", subject, slater_flag_name(d.slater_primal)});
      continue;
    }
    if (!d.pw_value.is_finite() || !d.db_value.is_finite()) {
      r.pass = false;
      r.failures.push_back({"strong duality", subject, "pw " + fmt(d.pw_value) + ", db " + fmt(d.db_value)});
      continue;
    }
    const double gap = std::abs(d.pw_value.value() - d.db_value.value());
    gaps.push_back(num(gap));
    r.max_error = std::max(r.max_error, gap);
    if (gap > gap_tol) {
      r.pass = false;
      r.failures.push_back({"strong duality", subject, "gap " + std::to_string(gap)});
    }
  }
  r.details["instances"] = instances;
  r.details["gaps"] = gaps;
  r.details["max_gap"] = num(r.max_error);
  return r;
}

}  // namespace rdro::driver
