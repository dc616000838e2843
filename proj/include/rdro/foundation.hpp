#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace rdro {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

enum class ErrorKind {
  IndeterminateSum,
  IndeterminateProduct,
  DimensionMismatch,
  InvalidArgument,
  UnsupportedComposition,
  NonpositiveScale,
  NotInDualCone,
  SingularBasis,
  UnsupportedCone,
  SolverFailure,
  Inconclusive,
  AssumptionSViolated,
  UnattainedWorstCase,
  NoInteriorSlater,
  NotRecession,
  HasEscapeDirections,
  PreconditionN,
  LPInfeasible,
  EmptyGridFeasible,
  SchemaError,
};

const char* error_kind_name(ErrorKind k);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& msg)
      : std::runtime_error(std::string(error_kind_name(kind)) + ": " + msg), kind_(kind), msg_(msg) {}
  ErrorKind kind() const { return kind_; }
  const std::string& message() const { return msg_; }

 private:
  ErrorKind kind_;
  std::string msg_;
};

class ExtReal {
 public:
  enum class Tag { finite, pos_inf, neg_inf };

  ExtReal() = default;
  ExtReal(double v);  // NOLINT: finite doubles convert implicitly; ±inf map to tags
  static ExtReal pos_inf() { return ExtReal(Tag::pos_inf); }
  static ExtReal neg_inf() { return ExtReal(Tag::neg_inf); }

  Tag tag() const { return tag_; }
  bool is_finite() const { return tag_ == Tag::finite; }
  bool is_pos_inf() const { return tag_ == Tag::pos_inf; }
  bool is_neg_inf() const { return tag_ == Tag::neg_inf; }
  // throws on infinite values
  double value() const;
  // ±inf as IEEE infinities
  double to_double() const;

  friend bool operator==(const ExtReal& a, const ExtReal& b);
  friend bool operator<(const ExtReal& a, const ExtReal& b);
  friend bool operator<=(const ExtReal& a, const ExtReal& b) { return !(b < a); }
  friend bool operator>(const ExtReal& a, const ExtReal& b) { return b < a; }
  friend bool operator>=(const ExtReal& a, const ExtReal& b) { return !(a < b); }

 private:
  explicit ExtReal(Tag t) : tag_(t) {}
  Tag tag_ = Tag::finite;
  double v_ = 0.0;
};

ExtReal ext_add(ExtReal a, ExtReal b);
ExtReal ext_scale(double t, ExtReal a);
ExtReal ext_neg(ExtReal a);
std::string to_string(const ExtReal& a);

struct Tolerances {
  double feas_tol = 1e-7;
  double opt_tol = 1e-6;
  double zero_tol = 1e-9;

  void validate() const;
};

inline void check_dim(long got, long want, const char* what) {
  if (got != want)
    throw Error(ErrorKind::DimensionMismatch,
                std::string(what) + ": expected " + std::to_string(want) + ", got " +
                    std::to_string(got));
}

}  // namespace rdro
