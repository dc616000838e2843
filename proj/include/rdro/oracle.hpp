#pragma once

// Brute-force grid references. One and two dimensions only.

#include "rdro/ot.hpp"

#include <utility>
#include <vector>

namespace rdro {

// tensor grid with the given step; throws past max_points
std::vector<Vec> make_grid(const Vec& lo, const Vec& hi, double step, std::size_t max_points = 4'000'000);

// max over the grid of w'x - f(x); -inf when f is +inf on every point
double grid_legendre(const FunctionExpr& f, const Vec& lo, const Vec& hi, double step, const Vec& w);

struct GridLPResult {
  double value = 0.0;
  std::vector<Vec> points;     // support of the masses
  std::vector<double> masses;
  std::vector<int> source;     // nominal atom per point (transport oracle), else 0
};

// max sum m g over grid masses, with sum m = 1 and the moment bounds
GridLPResult grid_worst_case_expectation(const AmbiguitySet& A, const Disutility& g, const std::vector<Vec>& grid,
                                         const Tolerances& tol = {});
// per-atom masses sum to p_k; total transport cost <= eps. Nominal atoms are added to the grid.
GridLPResult grid_worst_case_expectation(const OTAmbiguity& O, const Disutility& g, const std::vector<Vec>& grid,
                                         const Tolerances& tol = {});

double grid_sup(const SaddleFunction& f, const Vec& x, const UncertaintySet& Z, const std::vector<Vec>& grid,
                double feas_tol = 1e-7);

// (x, 2^-k) for k = 1..n
std::vector<std::pair<Vec, double>> naive_sequence(const Vec& x, int n = 40);
// inf of t f(x/t) over the second half of the sequence; +inf when that half only climbs
ExtReal liminf_perspective_probe(const FunctionExpr& f, const std::vector<std::pair<Vec, double>>& seq);

}  // namespace rdro
