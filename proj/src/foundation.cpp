#include "rdro/foundation.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace rdro {

const char* error_kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::IndeterminateSum: return "IndeterminateSum";
    case ErrorKind::IndeterminateProduct: return "IndeterminateProduct";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::UnsupportedComposition: return "UnsupportedComposition";
    case ErrorKind::NonpositiveScale: return "NonpositiveScale";
    case ErrorKind::NotInDualCone: return "NotInDualCone";
    case ErrorKind::SingularBasis: return "SingularBasis";
    case ErrorKind::UnsupportedCone: return "UnsupportedCone";
    case ErrorKind::SolverFailure: return "SolverFailure";
    case ErrorKind::Inconclusive: return "Inconclusive";
    case ErrorKind::AssumptionSViolated: return "AssumptionSViolated";
    case ErrorKind::UnattainedWorstCase: return "UnattainedWorstCase";
    case ErrorKind::NoInteriorSlater: return "NoInteriorSlater";
    case ErrorKind::NotRecession: return "NotRecession";
    case ErrorKind::HasEscapeDirections: return "HasEscapeDirections";
    case ErrorKind::PreconditionN: return "PreconditionN";
    case ErrorKind::LPInfeasible: return "LPInfeasible";
    case ErrorKind::EmptyGridFeasible: return "EmptyGridFeasible";
    case ErrorKind::SchemaError: return "SchemaError";
  }
  return "Error";
}

ExtReal::ExtReal(double v) {
  if (std::isnan(v)) throw Error(ErrorKind::InvalidArgument, "NaN is not an extended real");
  if (std::isinf(v)) {
    tag_ = v > 0 ? Tag::pos_inf : Tag::neg_inf;
  } else {
    v_ = v;
  }
}

double ExtReal::value() const {
  if (tag_ != Tag::finite) throw Error(ErrorKind::InvalidArgument, "value() of infinite ExtReal");
  return v_;
}

double ExtReal::to_double() const {
  switch (tag_) {
    case Tag::pos_inf: return std::numeric_limits<double>::infinity();
    case Tag::neg_inf: return -std::numeric_limits<double>::infinity();
    default: return v_;
  }
}

bool operator==(const ExtReal& a, const ExtReal& b) {
  if (a.tag_ != b.tag_) return false;
  return a.tag_ != ExtReal::Tag::finite || a.v_ == b.v_;
}

bool operator<(const ExtReal& a, const ExtReal& b) {
  auto rank = [](const ExtReal& x) {
    return x.tag_ == ExtReal::Tag::neg_inf ? 0 : x.tag_ == ExtReal::Tag::finite ? 1 : 2;
  };
  int ra = rank(a), rb = rank(b);
  if (ra != rb) return ra < rb;
  return ra == 1 && a.v_ < b.v_;
}

ExtReal ext_add(ExtReal a, ExtReal b) {
  if ((a.is_pos_inf() && b.is_neg_inf()) || (a.is_neg_inf() && b.is_pos_inf()))
    throw Error(ErrorKind::IndeterminateSum, "(+inf) + (-inf)");
  if (!a.is_finite()) return a;
  if (!b.is_finite()) return b;
  return ExtReal(a.value() + b.value());
}

ExtReal ext_scale(double t, ExtReal a) {
  if (t < 0) throw Error(ErrorKind::NonpositiveScale, "ext_scale with negative t");
  if (a.is_finite()) return ExtReal(t * a.value());
  if (t == 0) throw Error(ErrorKind::IndeterminateProduct, "0 * inf");
  return a;
}

ExtReal ext_neg(ExtReal a) {
  if (a.is_pos_inf()) return ExtReal::neg_inf();
  if (a.is_neg_inf()) return ExtReal::pos_inf();
  return ExtReal(-a.value());
}

std::string to_string(const ExtReal& a) {
  if (a.is_pos_inf()) return "+inf";
  if (a.is_neg_inf()) return "-inf";
  std::ostringstream os;
  os.precision(12);
  os << a.value() + 0.0;
  return os.str();
}

void Tolerances::validate() const {
  if (!(feas_tol > 0 && opt_tol > 0 && zero_tol > 0))
    throw Error(ErrorKind::InvalidArgument, "tolerances must be strictly positive");
  if (!(zero_tol <= feas_tol && feas_tol <= opt_tol * 10))
    throw Error(ErrorKind::InvalidArgument, "need zero_tol <= feas_tol <= 10 * opt_tol");
}

}  // namespace rdro
