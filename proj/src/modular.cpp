#include "vlab/modular.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "vlab/simd.hpp"

namespace vlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_same_grid(const GridDomain& a, const GridDomain& b) {
  if (!a.same_grid(b)) throw GridError("function, exponent and region must share one grid");
}

template <class ExponentAt>
ExactSum sum_terms(const GridFunction& f, const GridDomain& region, ExponentAt p_at, bool& overflow) {
  require_same_grid(f.domain(), region);
  ExactSum s;
  overflow = false;
  for (std::size_t c : region.cells()) {
    const double a = f.at_box(c);
    if (a == 0.0) continue;
    const double t = pow_abs(a, p_at(c), overflow);
    if (overflow) return s;
    s.add(t);
  }
  return s;
}

ModularValue finish(const ExactSum& s, bool overflow, const GridDomain& region) {
  ModularValue m;
  m.measure = region.measure();
  m.h = region.h();
  double v = overflow ? kInf : s.value() * region.cell_volume();
  if (std::isinf(v)) {
    overflow = true;
    v = kInf;
  }
  m.value = v;
  m.overflow = overflow;
  return m;
}

// rho(f / lambda) over the region, in the same overflow-safe arithmetic.
double scaled_modular(std::span<const double> absf, std::span<const double> p, double lambda,
                      double vol) {
  ExactSum s;
  bool overflow = false;
  for (std::size_t i = 0; i < absf.size(); ++i) {
    const double a = absf[i] / lambda;
    double t;
    if (std::isinf(a) || a > 1e100) {
      t = std::exp(p[i] * (std::log(absf[i]) - std::log(lambda)));
      if (std::isinf(t)) return kInf;
    } else {
      t = pow_abs(a, p[i], overflow);
      if (overflow) return kInf;
    }
    s.add(t);
  }
  return s.value() * vol;
}

double norm_impl(std::span<const double> absf, std::span<const double> p, double measure,
                 double vol, double rtol) {
  if (!(rtol > 0) || rtol > 1e-2) throw std::invalid_argument("rtol must lie in (0, 1e-2]");
  if (absf.empty()) return 0.0;
  const double fmax = simd::minmax(absf).max;
  if (fmax == 0.0) return 0.0;
  const double pmin = simd::minmax(p).min;
  const double lambda0 = fmax * std::pow(measure, 1.0 / pmin);
  auto fits = [&](double lambda) { return scaled_modular(absf, p, lambda, vol) <= 1.0; };
  double lo, hi;
  int guard = 0;
  if (fits(lambda0)) {
    hi = lambda0;
    lo = lambda0 / 2;
    while (fits(lo)) {
      hi = lo;
      lo /= 2;
      if (++guard > 4000 || lo == 0.0) throw ConvergenceError("norm bracket collapsed to zero");
    }
  } else {
    lo = lambda0;
    hi = lambda0 * 2;
    while (!fits(hi)) {
      lo = hi;
      hi *= 2;
      if (++guard > 4000 || std::isinf(hi)) throw ConvergenceError("norm bracket diverged");
    }
  }
  for (int it = 0; hi - lo > rtol * lo; ++it) {
    if (it >= 200) throw ConvergenceError("norm bisection did not converge in 200 steps");
    const double mid = lo + (hi - lo) / 2;
    if (mid <= lo || mid >= hi) break;
    if (fits(mid))
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

}  // namespace

double pow_abs(double a, double p, bool& overflow) {
  a = std::fabs(a);
  if (a == 0.0) return 0.0;
  if (a == 1.0) return 1.0;
  const double la = std::log(a);
  double t;
  if (a > 1e100 || p * la > 700)
    t = std::exp(p * la);
  else
    t = std::pow(a, p);
  if (std::isinf(t)) {
    overflow = true;
    return kInf;
  }
  return t;
}

ExactSum modular_sum(const GridFunction& f, const ExponentField& p, const GridDomain& region,
                     bool& overflow) {
  require_same_grid(p.domain(), region);
  for (std::size_t c : region.cells())
    if (!p.domain().contains(c)) throw GridError("exponent undefined on part of the region");
  return sum_terms(f, region, [&](std::size_t c) { return p.at_box(c); }, overflow);
}

ExactSum modular_sum(const GridFunction& f, double p, const GridDomain& region, bool& overflow) {
  if (!(p >= 1) || !std::isfinite(p)) throw GridError("exponent must be finite and >= 1");
  return sum_terms(f, region, [&](std::size_t) { return p; }, overflow);
}

ModularValue modular(const GridFunction& f, const ExponentField& p, const GridDomain& region) {
  bool overflow = false;
  const ExactSum s = modular_sum(f, p, region, overflow);
  return finish(s, overflow, region);
}

ModularValue modular(const GridFunction& f, const ExponentField& p) {
  return modular(f, p, f.domain());
}

ModularValue modular(const GridFunction& f, double p, const GridDomain& region) {
  bool overflow = false;
  const ExactSum s = modular_sum(f, p, region, overflow);
  return finish(s, overflow, region);
}

ModularValue modular(const GridFunction& f, double p) { return modular(f, p, f.domain()); }

double luxemburg_norm(const GridFunction& f, const ExponentField& p, const GridDomain& region,
                      double rtol) {
  require_same_grid(f.domain(), region);
  require_same_grid(p.domain(), region);
  std::vector<double> absf, ps;
  absf.reserve(region.cell_count());
  ps.reserve(region.cell_count());
  for (std::size_t c : region.cells()) {
    if (!p.domain().contains(c)) throw GridError("exponent undefined on part of the region");
    const double a = std::fabs(f.at_box(c));
    if (a == 0.0) continue;
    absf.push_back(a);
    ps.push_back(p.at_box(c));
  }
  return norm_impl(absf, ps, region.measure(), region.cell_volume(), rtol);
}

double luxemburg_norm(const GridFunction& f, const ExponentField& p, double rtol) {
  return luxemburg_norm(f, p, f.domain(), rtol);
}

double luxemburg_norm(const GridFunction& f, double p, double rtol) {
  if (!(p >= 1) || !std::isfinite(p)) throw GridError("exponent must be finite and >= 1");
  std::vector<double> absf;
  for (double v : f.values())
    if (v != 0.0) absf.push_back(std::fabs(v));
  const std::vector<double> ps(absf.size(), p);
  return norm_impl(absf, ps, f.domain().measure(), f.domain().cell_volume(), rtol);
}

UnitBall unit_ball_check(const GridFunction& f, const ExponentField& p, double rtol) {
  UnitBall u{};
  u.modular = modular(f, p).value;
  u.norm = luxemburg_norm(f, p, rtol);
  u.modular_le_one = u.modular <= 1.0;
  u.norm_le_one = u.norm <= 1.0 + rtol;
  return u;
}

std::vector<ModularValue> partial_modulars(const GridFunction& f, const ExponentField& p,
                                           const GridDomain& region, const TruncationSchedule& s) {
  s.validate();
  std::vector<ModularValue> out;
  out.reserve(s.radii.size());
  for (double r : s.radii) out.push_back(modular(f, p, ball_restrict(region, r)));
  return out;
}

}  // namespace vlab
