#include "rdro/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace rdro::io {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw Error(ErrorKind::SchemaError, (path.empty() ? "/" : path) + ": " + msg);
}

std::string at(const std::string& path, const std::string& key) { return path + "/" + key; }
std::string at(const std::string& path, std::size_t i) { return path + "/" + std::to_string(i); }

const json& req(const json& j, const std::string& key, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) fail(at(path, key), "missing");
  return *it;
}

const json* opt(const json& j, const std::string& key) {
  if (!j.is_object()) return nullptr;
  auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

int to_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  return j.get<int>();
}

bool to_bool(const json& j, const std::string& path) {
  if (!j.is_boolean()) fail(path, "expected a boolean");
  return j.get<bool>();
}

std::string to_str(const json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

const json& array_at(const json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array");
  return j;
}

Norm norm_from(const json& j, const std::string& path) {
  const std::string s = to_str(j, path);
  if (s == "l1") return Norm::l1;
  if (s == "l2") return Norm::l2;
  if (s == "linf") return Norm::linf;
  fail(path, "unknown norm '" + s + "'");
}

// factories reject bad data with InvalidArgument; report those at the descriptor
template <class F>
auto guarded(const std::string& path, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::SchemaError) throw;
    if (e.kind() == ErrorKind::UnsupportedComposition) throw;
    fail(path, e.message());
  }
}

}  // namespace

json num(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  double r = std::strtod(buf, nullptr);
  return r == 0 ? 0.0 : r;
}

double to_double(const json& j, const std::string& path) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "inf" || s == "+inf") return INFINITY;
    if (s == "-inf") return -INFINITY;
  }
  fail(path, "expected a number");
}

json vec_json(const Vec& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(num(v[i]));
  return a;
}

Vec vec_from(const json& j, const std::string& path) {
  if (j.is_array()) {
    Vec v(static_cast<int>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<int>(i)] = to_double(j[i], at(path, i));
    return v;
  }
  if (j.is_object()) {
    const int n = to_int(req(j, "size", path), at(path, "size"));
    Vec v = Vec::Zero(n);
    const json& e = array_at(req(j, "entries", path), at(path, "entries"));
    for (std::size_t k = 0; k < e.size(); ++k) {
      const std::string p = at(at(path, "entries"), k);
      if (!e[k].is_array() || e[k].size() != 2) fail(p, "expected [index, value]");
      const int i = to_int(e[k][0], p);
      if (i < 0 || i >= n) fail(p, "index out of range");
      v[i] = to_double(e[k][1], p);
    }
    return v;
  }
  fail(path, "expected a vector");
}

json sparse_vec_json(const Vec& v) {
  json e = json::array();
  for (int i = 0; i < v.size(); ++i)
    if (v[i] != 0) e.push_back({i, num(v[i])});
  return {{"size", v.size()}, {"entries", e}};
}

json mat_json(const Mat& A) {
  json e = json::array();
  for (int r = 0; r < A.rows(); ++r)
    for (int c = 0; c < A.cols(); ++c)
      if (A(r, c) != 0) e.push_back({r, c, num(A(r, c))});
  return {{"rows", A.rows()}, {"cols", A.cols()}, {"entries", e}};
}

Mat mat_from(const json& j, const std::string& path, long rows, long cols) {
  Mat A;
  if (j.is_array()) {
    const long r = static_cast<long>(j.size());
    long c = r > 0 ? -1 : (cols >= 0 ? cols : 0);
    for (std::size_t i = 0; i < j.size(); ++i) {
      const std::string p = at(path, i);
      if (!j[i].is_array()) fail(p, "expected a matrix row");
      if (c < 0) c = static_cast<long>(j[i].size());
      if (static_cast<long>(j[i].size()) != c) fail(p, "ragged matrix");
    }
    A = Mat::Zero(r, c);
    for (std::size_t i = 0; i < j.size(); ++i)
      for (std::size_t k = 0; k < j[i].size(); ++k)
        A(static_cast<int>(i), static_cast<int>(k)) = to_double(j[i][k], at(at(path, i), k));
    if (r == 0 && rows > 0) A = Mat::Zero(rows, c);
  } else if (j.is_object()) {
    const int r = to_int(req(j, "rows", path), at(path, "rows"));
    const int c = to_int(req(j, "cols", path), at(path, "cols"));
    if (r < 0 || c < 0) fail(path, "negative shape");
    A = Mat::Zero(r, c);
    const json& e = array_at(req(j, "entries", path), at(path, "entries"));
    for (std::size_t k = 0; k < e.size(); ++k) {
      const std::string p = at(at(path, "entries"), k);
      if (!e[k].is_array() || e[k].size() != 3) fail(p, "expected [row, col, value]");
      const int a = to_int(e[k][0], p), b = to_int(e[k][1], p);
      if (a < 0 || a >= r || b < 0 || b >= c) fail(p, "index out of range");
      A(a, b) = to_double(e[k][2], p);
    }
  } else {
    fail(path, "expected a matrix");
  }
  if (rows >= 0 && A.rows() != rows) fail(path, "expected " + std::to_string(rows) + " rows");
  if (cols >= 0 && A.cols() != cols) fail(path, "expected " + std::to_string(cols) + " columns");
  return A;
}

// ---------------------------------------------------------------- functions

json function_json(const FunctionExpr& f) {
  const Node& n = f.node();
  json j;
  j["kind"] = node_kind_name(n.kind);
  j["dim"] = n.dim;
  switch (n.kind) {
    case NodeKind::Affine:
      j["a"] = vec_json(n.a);
      j["b"] = num(n.b);
      break;
    case NodeKind::IndicatorSingleton: j["center"] = vec_json(n.center); break;
    case NodeKind::IndicatorBox:
    case NodeKind::SupportOfBox:
      j["lo"] = vec_json(n.lo);
      j["hi"] = vec_json(n.hi);
      break;
    case NodeKind::IndicatorNormBall:
      j["center"] = vec_json(n.center);
      j["radius"] = num(n.radius);
      j["norm"] = norm_name(n.norm);
      break;
    case NodeKind::NormPower:
      j["p"] = num(n.p);
      j["weight"] = num(n.weight);
      j["norm"] = norm_name(n.norm);
      break;
    case NodeKind::QuadOverLin:
    case NodeKind::NegLog:
    case NodeKind::NegEntropy: break;
    case NodeKind::Exponential: j["s"] = num(n.s); break;
    case NodeKind::AffinePrecompose:
      j["A"] = mat_json(n.A);
      j["offset"] = vec_json(n.offset);
      break;
    case NodeKind::NonnegScale: j["t"] = num(n.t); break;
    case NodeKind::AddAffine:
      j["a"] = vec_json(n.a);
      j["b"] = num(n.b);
      break;
    case NodeKind::SumDisjointBlocks: j["blocks"] = n.blocks; break;
    case NodeKind::Perspective:
    case NodeKind::EpiIndicator:
    case NodeKind::MaxOfConcave: break;
    case NodeKind::LiftedInf:
      j["M"] = mat_json(n.A);
      j["c"] = vec_json(n.a);
      break;
  }
  if (!n.kids.empty()) {
    json args = json::array();
    for (const auto& k : n.kids) args.push_back(function_json(k));
    j["args"] = args;
  }
  return j;
}

FunctionExpr function_from(const json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "expected a function descriptor");
  const std::string kind = to_str(req(j, "kind", path), at(path, "kind"));
  auto vec = [&](const char* key) { return vec_from(req(j, key, path), at(path, key)); };
  auto dbl = [&](const char* key, double dflt) {
    const json* v = opt(j, key);
    return v ? to_double(*v, at(path, key)) : dflt;
  };
  auto integer = [&](const char* key) { return to_int(req(j, key, path), at(path, key)); };
  auto norm = [&]() {
    const json* v = opt(j, "norm");
    return v ? norm_from(*v, at(path, "norm")) : Norm::l2;
  };
  auto args = [&]() {
    std::vector<FunctionExpr> out;
    const json& a = array_at(req(j, "args", path), at(path, "args"));
    for (std::size_t i = 0; i < a.size(); ++i) out.push_back(function_from(a[i], at(at(path, "args"), i)));
    return out;
  };
  auto one_arg = [&]() {
    auto a = args();
    if (a.size() != 1) fail(at(path, "args"), "expected exactly one argument");
    return a[0];
  };

  FunctionExpr f = guarded(path, [&]() -> FunctionExpr {
    if (kind == "affine") return affine(vec("a"), dbl("b", 0.0));
    if (kind == "zero") return zero_function(integer("dim"));
    if (kind == "indicator_singleton") return indicator_singleton(vec("center"));
    if (kind == "indicator_box") return indicator_box(vec("lo"), vec("hi"));
    if (kind == "indicator_norm_ball") return indicator_norm_ball(vec("center"), dbl("radius", 1.0), norm());
    if (kind == "norm_power") return norm_power(integer("dim"), dbl("p", 1.0), dbl("weight", 1.0), norm());
    if (kind == "quad_over_lin") return quad_over_lin(integer("dim"));
    if (kind == "exponential") return exponential(dbl("s", 1.0));
    if (kind == "neg_log") return neg_log();
    if (kind == "neg_entropy") return neg_entropy();
    if (kind == "support_of_box") return support_of_box(vec("lo"), vec("hi"));
    if (kind == "precompose") {
      FunctionExpr g = one_arg();
      const json* off = opt(j, "offset");
      Mat A = mat_from(req(j, "A", path), at(path, "A"), g.dim());
      return precompose(g, A, off ? vec_from(*off, at(path, "offset")) : Vec(Vec::Zero(g.dim())));
    }
    if (kind == "shift") return shift(one_arg(), vec("b"));
    if (kind == "scale") return scale(dbl("t", 1.0), one_arg());
    if (kind == "add_affine") return add_affine(one_arg(), vec("a"), dbl("b", 0.0));
    if (kind == "sum_blocks") {
      auto a = args();
      const json& b = array_at(req(j, "blocks", path), at(path, "blocks"));
      if (b.size() != a.size()) fail(at(path, "blocks"), "one block per argument");
      std::vector<std::pair<FunctionExpr, std::vector<int>>> parts;
      for (std::size_t i = 0; i < a.size(); ++i) {
        std::vector<int> idx;
        const json& bi = array_at(b[i], at(at(path, "blocks"), i));
        for (std::size_t k = 0; k < bi.size(); ++k) idx.push_back(to_int(bi[k], at(at(at(path, "blocks"), i), k)));
        parts.emplace_back(a[i], idx);
      }
      return sum_blocks(parts, integer("dim"));
    }
    if (kind == "sum") return sum_shared(args());
    if (kind == "perspective") return perspective(one_arg());
    if (kind == "epi_indicator") return epi_indicator(one_arg());
    if (kind == "lifted_inf") {
      FunctionExpr g = one_arg();
      return lifted_inf(g, mat_from(req(j, "M", path), at(path, "M"), -1, g.dim()), vec("c"));
    }
    if (kind == "max_of_concave") return max_of_concave(args());
    if (kind == "conjugate") return conjugate(one_arg()).expr;
    fail(at(path, "kind"), "unknown function kind '" + kind + "'");
  });
  if (const json* d = opt(j, "dim"); d && to_int(*d, at(path, "dim")) != f.dim())
    fail(at(path, "dim"), "declared dim " + std::to_string(to_int(*d, at(path, "dim"))) + " but the function has " +
                              std::to_string(f.dim()));
  return f;
}

// ---------------------------------------------------------------- programs

namespace {

const char* domain_name(Domain d) {
  switch (d) {
    case Domain::free: return "free";
    case Domain::nonneg: return "nonneg";
    case Domain::soc: return "soc";
  }
  return "?";
}

Domain domain_from(const json& j, const std::string& path) {
  const std::string s = to_str(j, path);
  if (s == "free") return Domain::free;
  if (s == "nonneg") return Domain::nonneg;
  if (s == "soc") return Domain::soc;
  fail(path, "unknown domain '" + s + "'");
}

json term_json(const Term& t) { return {{"f", function_json(t.f)}, {"A", mat_json(t.A)}, {"b", vec_json(t.b)}}; }

Term term_from(const json& j, const std::string& path, int nv) {
  FunctionExpr f = function_from(req(j, "f", path), at(path, "f"));
  Term t;
  t.f = f;
  t.A = mat_from(req(j, "A", path), at(path, "A"), f.dim(), nv);
  t.b = vec_from(req(j, "b", path), at(path, "b"));
  if (t.b.size() != f.dim()) fail(at(path, "b"), "length must match the function arity");
  return t;
}

}  // namespace

json program_json(const FiniteConvexProgram& P) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["provenance"] = P.provenance;
  j["sense"] = P.sense == Sense::minimize ? "minimize" : "maximize";
  j["num_vars"] = P.num_vars;
  json blocks = json::array();
  for (const auto& b : P.blocks)
    blocks.push_back(
        {{"name", b.name}, {"symbol", b.symbol}, {"offset", b.offset}, {"size", b.size}, {"domain", domain_name(b.domain)}});
  j["blocks"] = blocks;
  j["objective"] = {{"lin", sparse_vec_json(P.obj_lin)}, {"const", num(P.obj_const)}, {"terms", json::array()}};
  for (const auto& t : P.obj_terms) j["objective"]["terms"].push_back(term_json(t));
  json cons = json::array();
  for (const auto& c : P.constraints) {
    json cj{{"label", c.label}, {"lin", sparse_vec_json(c.lin)}, {"c0", num(c.c0)}, {"terms", json::array()}};
    for (const auto& t : c.terms) cj["terms"].push_back(term_json(t));
    cons.push_back(cj);
  }
  j["constraints"] = cons;
  j["equalities"] = {{"A", mat_json(P.eq_A)}, {"b", vec_json(P.eq_b)}, {"labels", P.eq_labels}};
  return j;
}

FiniteConvexProgram program_from(const json& j, const std::string& path) {
  FiniteConvexProgram P;
  if (const json* v = opt(j, "schema_version"); v && to_int(*v, at(path, "schema_version")) != kSchemaVersion)
    fail(at(path, "schema_version"), "unsupported schema version");
  P.provenance = to_str(req(j, "provenance", path), at(path, "provenance"));
  const std::string sense = to_str(req(j, "sense", path), at(path, "sense"));
  if (sense != "minimize" && sense != "maximize") fail(at(path, "sense"), "expected minimize or maximize");
  P.sense = sense == "minimize" ? Sense::minimize : Sense::maximize;
  const json& blocks = array_at(req(j, "blocks", path), at(path, "blocks"));
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const std::string p = at(at(path, "blocks"), i);
    const int off = P.add_block(to_str(req(blocks[i], "name", p), at(p, "name")),
                                to_str(req(blocks[i], "symbol", p), at(p, "symbol")),
                                to_int(req(blocks[i], "size", p), at(p, "size")),
                                domain_from(req(blocks[i], "domain", p), at(p, "domain")));
    if (const json* o = opt(blocks[i], "offset"); o && to_int(*o, at(p, "offset")) != off)
      fail(at(p, "offset"), "offset disagrees with the block order");
  }
  const int nv = P.num_vars;
  if (const json* v = opt(j, "num_vars"); v && to_int(*v, at(path, "num_vars")) != nv)
    fail(at(path, "num_vars"), "disagrees with the blocks");
  const std::string op = at(path, "objective");
  const json& obj = req(j, "objective", path);
  P.obj_lin = vec_from(req(obj, "lin", op), at(op, "lin"));
  if (P.obj_lin.size() != nv) fail(at(op, "lin"), "length must equal num_vars");
  if (const json* c = opt(obj, "const")) P.obj_const = to_double(*c, at(op, "const"));
  if (const json* ts = opt(obj, "terms"))
    for (std::size_t i = 0; i < array_at(*ts, at(op, "terms")).size(); ++i)
      P.obj_terms.push_back(term_from((*ts)[i], at(at(op, "terms"), i), nv));
  if (const json* cs = opt(j, "constraints")) {
    for (std::size_t i = 0; i < array_at(*cs, at(path, "constraints")).size(); ++i) {
      const std::string p = at(at(path, "constraints"), i);
      const json& cj = (*cs)[i];
      Constraint c;
      c.lin = vec_from(req(cj, "lin", p), at(p, "lin"));
      if (c.lin.size() != nv) fail(at(p, "lin"), "length must equal num_vars");
      if (const json* c0 = opt(cj, "c0")) c.c0 = to_double(*c0, at(p, "c0"));
      if (const json* l = opt(cj, "label")) c.label = to_str(*l, at(p, "label"));
      if (const json* ts = opt(cj, "terms"))
        for (std::size_t k = 0; k < array_at(*ts, at(p, "terms")).size(); ++k)
          c.terms.push_back(term_from((*ts)[k], at(at(p, "terms"), k), nv));
      P.add_constraint(c);
    }
  }
  if (const json* e = opt(j, "equalities")) {
    const std::string p = at(path, "equalities");
    Mat A = mat_from(req(*e, "A", p), at(p, "A"), -1, nv);
    Vec b = vec_from(req(*e, "b", p), at(p, "b"));
    if (b.size() != A.rows()) fail(at(p, "b"), "one right-hand side per row");
    std::vector<std::string> labels;
    if (const json* l = opt(*e, "labels")) {
      for (std::size_t i = 0; i < array_at(*l, at(p, "labels")).size(); ++i)
        labels.push_back(to_str((*l)[i], at(at(p, "labels"), i)));
      if (static_cast<long>(labels.size()) != A.rows()) fail(at(p, "labels"), "one label per row");
    }
    for (int r = 0; r < A.rows(); ++r)
      P.add_equality(A.row(r).transpose(), b[r], labels.empty() ? "" : labels[r]);
  }
  guarded(path, [&] {
    P.validate();
    return 0;
  });
  return P;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

// ---------------------------------------------------------------- specs

const char* kind_name(Kind k) {
  switch (k) {
    case Kind::robust: return "robust";
    case Kind::uq_moment: return "uq_moment";
    case Kind::uq_moment_generalized: return "uq_moment_generalized";
    case Kind::uq_ot: return "uq_ot";
  }
  return "?";
}

namespace {

std::vector<FunctionExpr> functions_from(const json& j, const std::string& path) {
  std::vector<FunctionExpr> out;
  for (std::size_t i = 0; i < array_at(j, path).size(); ++i) out.push_back(function_from(j[i], at(path, i)));
  return out;
}

UncertaintySet set_from(const json& j, const std::string& path) {
  if (const json* b = opt(j, "box")) {
    const std::string p = at(path, "box");
    Vec lo = vec_from(req(*b, "lo", p), at(p, "lo")), hi = vec_from(req(*b, "hi", p), at(p, "hi"));
    if (lo.size() != hi.size()) fail(p, "lo and hi differ in length");
    for (int i = 0; i < lo.size(); ++i)
      if (!(lo[i] <= hi[i])) fail(p, "empty box");
    return box_set(lo, hi);
  }
  UncertaintySet Z;
  Z.dim = to_int(req(j, "dim", path), at(path, "dim"));
  if (const json* c = opt(j, "constraints")) Z.constraints = functions_from(*c, at(path, "constraints"));
  for (std::size_t l = 0; l < Z.constraints.size(); ++l)
    if (Z.constraints[l].dim() != Z.dim) fail(at(at(path, "constraints"), l), "arity differs from the set dim");
  return Z;
}

SaddleFunction saddle_from(const json& j, const std::string& path) {
  if (const json* b = opt(j, "bi_affine")) {
    const std::string p = at(path, "bi_affine");
    Vec a = vec_from(req(*b, "a", p), at(p, "a")), c = vec_from(req(*b, "c", p), at(p, "c"));
    const json* a0 = opt(*b, "a0");
    Mat Q = mat_from(req(*b, "Q", p), at(p, "Q"), a.size(), c.size());
    return guarded(p, [&] { return bi_affine(a, a0 ? to_double(*a0, at(p, "a0")) : 0.0, Q, c); });
  }
  SaddleFunction f;
  f.p = function_from(req(j, "p", path), at(path, "p"));
  const json* nq = opt(j, "neg_q");
  f.neg_q = nq ? function_from(*nq, at(path, "neg_q")) : zero_function(0);
  const json* Q = opt(j, "Q");
  f.Q = Q ? mat_from(*Q, at(path, "Q"), f.p.dim(), f.neg_q.dim()) : Mat(Mat::Zero(f.p.dim(), f.neg_q.dim()));
  return f;
}

ProperCone cone_from(const json& j, const std::string& path) {
  const std::string k = to_str(req(j, "kind", path), at(path, "kind"));
  const int d = to_int(req(j, "dim", path), at(path, "dim"));
  return guarded(path, [&] {
    if (k == "orthant") return ProperCone::orthant(d);
    if (k == "soc") return ProperCone::soc(d);
    fail(at(path, "kind"), "unknown cone '" + k + "'");
  });
}

CConvexFunction cfun_from(const json& j, const std::string& path) {
  if (const json* o = opt(j, "orthant"))
    return guarded(path, [&] { return CConvexFunction::orthant(functions_from(*o, at(path, "orthant"))); });
  if (const json* s = opt(j, "soc")) {
    const std::string p = at(path, "soc");
    FunctionExpr tail = function_from(req(*s, "tail", p), at(p, "tail"));
    Vec a = vec_from(req(*s, "a", p), at(p, "a"));
    Mat A = mat_from(req(*s, "A", p), at(p, "A"), a.size(), tail.dim());
    return guarded(p, [&] { return CConvexFunction::soc(A, a, tail); });
  }
  // a bare function is a one-row orthant function
  return CConvexFunction::scalar(function_from(j, path));
}

Kind kind_from(const json& j, const std::string& path) {
  const std::string s = to_str(j, path);
  if (s == "robust") return Kind::robust;
  if (s == "uq_moment") return Kind::uq_moment;
  if (s == "uq_moment_generalized") return Kind::uq_moment_generalized;
  if (s == "uq_ot") return Kind::uq_ot;
  fail(path, "unknown problem kind '" + s + "'");
}

TransportCost cost_from(const json& j, const std::string& path, int dim) {
  const std::string type = to_str(req(j, "type", path), at(path, "type"));
  if (type == "wasserstein") {
    const double p = to_double(req(j, "p", path), at(path, "p"));
    const json* n = opt(j, "norm");
    return guarded(path, [&] { return wasserstein_cost(dim, p, n ? norm_from(*n, at(path, "norm")) : Norm::l2); });
  }
  if (type == "custom") {
    TransportCost c;
    c.displacement = function_from(req(j, "expr", path), at(path, "expr"));
    if (c.displacement.dim() != dim) fail(at(path, "expr"), "arity differs from the support dim");
    c.identity_of_indiscernibles =
        to_bool(req(j, "identity_of_indiscernibles", path), at(path, "identity_of_indiscernibles"));
    c.superlinear = to_bool(req(j, "superlinear", path), at(path, "superlinear"));
    return c;
  }
  fail(at(path, "type"), "unknown cost type '" + type + "'");
}

}  // namespace

ProblemSpec spec_from(const json& j) {
  if (!j.is_object()) fail("", "spec must be an object");
  if (const json* v = opt(j, "schema_version"); v && to_int(*v, "/schema_version") != kSchemaVersion)
    fail("/schema_version", "unsupported schema version");
  ProblemSpec S;
  S.raw = j;
  S.kind = kind_from(req(j, "kind", ""), "/kind");

  if (const json* s = opt(j, "solver")) {
    if (!s->is_object()) fail("/solver", "expected an object");
    if (const json* v = opt(*s, "feas_tol")) S.tol.feas_tol = to_double(*v, "/solver/feas_tol");
    if (const json* v = opt(*s, "opt_tol")) S.tol.opt_tol = to_double(*v, "/solver/opt_tol");
    if (const json* v = opt(*s, "zero_tol")) S.tol.zero_tol = to_double(*v, "/solver/zero_tol");
    if (const json* v = opt(*s, "gap_tol")) S.solver.gap_tol = to_double(*v, "/solver/gap_tol");
    if (const json* v = opt(*s, "ball_radius")) S.solver.ball_radius = to_double(*v, "/solver/ball_radius");
    if (const json* v = opt(*s, "max_newton")) S.solver.max_newton = to_int(*v, "/solver/max_newton");
  }
  if (const json* o = opt(j, "oracle")) S.oracle = *o;
  if (const json* v = opt(j, "verify")) S.verify = *v;

  auto validated = [](const std::string& path, auto&& fn) {
    guarded(path, [&] {
      fn();
      return 0;
    });
  };

  switch (S.kind) {
    case Kind::robust: {
      S.robust.objective = saddle_from(req(j, "objective", ""), "/objective");
      if (const json* c = opt(j, "constraints"))
        for (std::size_t i = 0; i < array_at(*c, "/constraints").size(); ++i)
          S.robust.constraints.push_back(saddle_from((*c)[i], at("/constraints", i)));
      if (const json* s = opt(j, "sets"))
        for (std::size_t i = 0; i < array_at(*s, "/sets").size(); ++i)
          S.robust.sets.push_back(set_from((*s)[i], at("/sets", i)));
      validated("", [&] { S.robust.validate(); });
      break;
    }
    case Kind::uq_moment: {
      S.moment.support = set_from(req(j, "support", ""), "/support");
      if (const json* m = opt(j, "moments"))
        for (std::size_t i = 0; i < array_at(*m, "/moments").size(); ++i) {
          const std::string p = at("/moments", i);
          S.moment.moments.push_back(
              {function_from(req((*m)[i], "h", p), at(p, "h")), to_double(req((*m)[i], "mu", p), at(p, "mu"))});
        }
      S.g.neg_pieces = functions_from(req(j, "neg_pieces", ""), "/neg_pieces");
      validated("", [&] {
        S.moment.validate();
        S.g.validate();
        check_dim(S.g.dim(), S.moment.dim(), "disutility arity");
      });
      break;
    }
    case Kind::uq_moment_generalized: {
      auto& G = S.generalized;
      G.dim = to_int(req(j, "dim", ""), "/dim");
      const json& comps = array_at(req(j, "components", ""), "/components");
      for (std::size_t k = 0; k < comps.size(); ++k) {
        const std::string p = at("/components", k);
        SupportComponent c;
        if (const json* pr = opt(comps[k], "prob")) c.prob = to_double(*pr, at(p, "prob"));
        if (const json* cs = opt(comps[k], "constraints"))
          for (std::size_t l = 0; l < array_at(*cs, at(p, "constraints")).size(); ++l)
            c.constraints.push_back(cfun_from((*cs)[l], at(at(p, "constraints"), l)));
        c.neg_pieces = functions_from(req(comps[k], "neg_pieces", p), at(p, "neg_pieces"));
        G.components.push_back(c);
      }
      if (const json* ms = opt(j, "moments"))
        for (std::size_t m = 0; m < array_at(*ms, "/moments").size(); ++m) {
          const std::string p = at("/moments", m);
          ConeMoment cm;
          cm.cone = cone_from(req((*ms)[m], "cone", p), at(p, "cone"));
          cm.mu = vec_from(req((*ms)[m], "mu", p), at(p, "mu"));
          const json& hs = array_at(req((*ms)[m], "h", p), at(p, "h"));
          for (std::size_t k = 0; k < hs.size(); ++k) cm.h.push_back(cfun_from(hs[k], at(at(p, "h"), k)));
          G.moments.push_back(cm);
        }
      validated("", [&] { G.validate(); });
      break;
    }
    case Kind::uq_ot: {
      auto& O = S.ot;
      O.support = set_from(req(j, "support", ""), "/support");
      const json& nom = req(j, "nominal", "");
      const json& atoms = array_at(req(nom, "atoms", "/nominal"), "/nominal/atoms");
      for (std::size_t k = 0; k < atoms.size(); ++k) O.nominal.atoms.push_back(vec_from(atoms[k], at("/nominal/atoms", k)));
      if (const json* pr = opt(nom, "probs")) {
        Vec p = vec_from(*pr, "/nominal/probs");
        O.nominal.probs.assign(p.data(), p.data() + p.size());
      } else {
        O.nominal.probs.assign(atoms.size(), atoms.empty() ? 0.0 : 1.0 / static_cast<double>(atoms.size()));
      }
      O.eps = to_double(req(j, "eps", ""), "/eps");
      O.cost = cost_from(req(j, "cost", ""), "/cost", O.support.dim);
      if (const json* d = opt(j, "decision")) {
        OTDecision D;
        D.dim = to_int(req(*d, "dim", "/decision"), "/decision/dim");
        const json& ps = array_at(req(*d, "pieces", "/decision"), "/decision/pieces");
        for (std::size_t i = 0; i < ps.size(); ++i) D.pieces.push_back(saddle_from(ps[i], at("/decision/pieces", i)));
        if (const json* xc = opt(*d, "x_constraints")) D.x_constraints = functions_from(*xc, "/decision/x_constraints");
        S.decision = D;
      } else {
        S.g.neg_pieces = functions_from(req(j, "neg_pieces", ""), "/neg_pieces");
      }
      validated("", [&] {
        O.validate(S.tol.feas_tol);
        if (!S.decision) {
          S.g.validate();
          check_dim(S.g.dim(), O.dim(), "disutility arity");
        }
      });
      break;
    }
  }
  return S;
}

ProblemSpec load_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::SchemaError, "cannot open " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::SchemaError, std::string("/: ") + e.what());
  }
  return spec_from(j);
}

}  // namespace rdro::io
