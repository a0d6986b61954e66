#pragma once

#include <stdexcept>
#include <vector>

#include "vlab/exact_sum.hpp"
#include "vlab/grid.hpp"

namespace vlab {

struct ModularValue {
  double value = 0.0;  // +inf when overflow is set
  double measure = 0.0;
  double h = 0.0;
  bool overflow = false;
};

class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// |a|^p for p >= 1. Switches to exp(p log|a|) for huge arguments and returns
// +inf (setting `overflow`) past the double range.
double pow_abs(double a, double p, bool& overflow);

// Exact sum of |f|^p over the cells of `region` (no cell-volume factor).
// `region` must lie on the grid of f and p; cells outside f's mask read 0.
ExactSum modular_sum(const GridFunction& f, const ExponentField& p, const GridDomain& region,
                     bool& overflow);
ExactSum modular_sum(const GridFunction& f, double p, const GridDomain& region, bool& overflow);

// rho_{p,region}(f) = sum |f_i|^{p_i} h^dim.
ModularValue modular(const GridFunction& f, const ExponentField& p, const GridDomain& region);
ModularValue modular(const GridFunction& f, const ExponentField& p);
// Constant exponent.
ModularValue modular(const GridFunction& f, double p, const GridDomain& region);
ModularValue modular(const GridFunction& f, double p);

// Luxemburg norm inf{lambda > 0 : rho(f / lambda) <= 1} by bracketing and
// bisection. The returned upper bracket end is within rtol (relative) above
// the true value. rtol must lie in (0, 1e-2].
double luxemburg_norm(const GridFunction& f, const ExponentField& p, const GridDomain& region,
                      double rtol = 1e-9);
double luxemburg_norm(const GridFunction& f, const ExponentField& p, double rtol = 1e-9);
double luxemburg_norm(const GridFunction& f, double p, double rtol = 1e-9);

struct UnitBall {
  bool modular_le_one;
  bool norm_le_one;  // norm <= 1 + rtol: the bisection band
  double modular;
  double norm;
};
UnitBall unit_ball_check(const GridFunction& f, const ExponentField& p, double rtol = 1e-9);

// Partial modulars over region ∩ B(0, R_k), one per radius (non-decreasing).
std::vector<ModularValue> partial_modulars(const GridFunction& f, const ExponentField& p,
                                           const GridDomain& region, const TruncationSchedule& s);

}  // namespace vlab
