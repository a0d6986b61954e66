#include "vlab/conditions.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "vlab/exact_sum.hpp"
#include "vlab/modular.hpp"
#include "vlab/simd.hpp"

namespace vlab {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

void require_common_domain(const ExponentField& p, const ExponentField& q) {
  if (!(p.domain() == q.domain())) throw GridError("p and q must be sampled on the same domain");
}

std::vector<double> samples(const ExponentField& p, const GridDomain& region) {
  std::vector<double> out;
  out.reserve(region.cell_count());
  for (std::size_t c : region.cells()) out.push_back(p.at_box(c));
  return out;
}

std::vector<GridDomain> truncations(const GridDomain& dom, const TruncationSchedule& s) {
  s.validate();
  if (s.radii.size() < 3) throw GridError("truncation schedule needs at least three radii");
  std::vector<GridDomain> out;
  for (double r : s.radii) {
    out.push_back(ball_restrict(dom, r));
    if (out.back().empty()) throw GridError("truncation at R = " + fmt(r) + " is empty");
  }
  return out;
}

std::vector<double> increments(const std::vector<double>& partial) {
  std::vector<double> d(partial.size());
  for (std::size_t k = 0; k < partial.size(); ++k) d[k] = partial[k] - (k ? partial[k - 1] : 0.0);
  return d;
}

bool last_three_nondecreasing_above(const std::vector<double>& d, double floor) {
  const std::size_t m = d.size();
  if (m < 3) return false;
  return d[m - 3] <= d[m - 2] && d[m - 2] <= d[m - 1] && d[m - 3] > floor;
}

// Exact measure of the cells of `region` where pred holds.
double measure_where(const GridDomain& region, const std::function<bool(std::size_t)>& pred) {
  std::size_t n = 0;
  for (std::size_t c : region.cells()) n += pred(c) ? 1 : 0;
  return static_cast<double>(n) * region.cell_volume();
}

}  // namespace

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::holds: return "holds";
    case Verdict::fails: return "fails";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "?";
}

Range ess_range(const ExponentField& p, const GridDomain& region) {
  if (region.empty()) throw GridError("ess_range of an empty region");
  if (!region.same_grid(p.domain())) throw GridError("region is not on the exponent's grid");
  for (std::size_t c : region.cells())
    if (!p.domain().contains(c)) throw GridError("exponent undefined on part of the region");
  const auto v = samples(p, region);
  const auto mm = simd::minmax(v);
  return {mm.min, mm.max};
}

Range ess_range(const ExponentField& p) { return ess_range(p, p.domain()); }

Trend classify_growth(const std::vector<double>& partial) {
  const auto d = increments(partial);
  const std::size_t m = d.size();
  if (m < 3) throw GridError("growth classification needs at least three truncations");
  if (last_three_nondecreasing_above(d, kDeltaGrow)) return Trend::growing;
  if (d[m - 1] < kDeltaStab && d[m - 2] < kDeltaStab) return Trend::stable;
  return Trend::unclear;
}

ConditionReport check_finite_measure(const ExponentField& p, const ExponentField& q) {
  require_common_domain(p, q);
  ConditionReport rep;
  rep.condition = "finite_measure";
  const Range pr = ess_range(p), qr = ess_range(q);
  rep.verdict = pr.hi <= qr.lo + kEpsTie ? Verdict::holds : Verdict::fails;
  double rmax = 0;
  for (std::size_t c : p.domain().cells()) rmax = std::max(rmax, p.domain().center_norm(c));
  rep.evidence.columns = {"R", "p_plus", "q_minus", "measure"};
  rep.evidence.rows.push_back({rmax, pr.hi, qr.lo, p.domain().measure()});
  rep.parameters = {{"eps_tie", kEpsTie}};
  return rep;
}

ConditionReport check_touching(const ExponentField& p, const ExponentField& q,
                               const TruncationSchedule& schedule,
                               const std::vector<double>& eps_grid) {
  require_common_domain(p, q);
  if (eps_grid.empty()) throw GridError("touching check needs at least one eps");
  for (double e : eps_grid)
    if (!(e > 0)) throw GridError("eps values must be positive");
  const auto parts = truncations(p.domain(), schedule);
  const std::size_t m = parts.size();
  ConditionReport rep;
  rep.condition = "touching";
  rep.parameters = {{"eps_tie", kEpsTie}, {"delta_stab", kDeltaStab}, {"delta_grow", kDeltaGrow}};
  for (double e : eps_grid) rep.parameters.emplace_back("eps", e);

  std::vector<double> p_plus(m), q_minus(m), gap(m);
  for (std::size_t k = 0; k < m; ++k) {
    p_plus[k] = ess_range(p, parts[k]).hi;
    q_minus[k] = ess_range(q, parts[k]).lo;
    gap[k] = q_minus[k] - p_plus[k];
  }
  // Exceptional sets are measured against the values on the largest truncation.
  const double s_p = p_plus[m - 1], s_q = q_minus[m - 1];
  const double eps_min = *std::min_element(eps_grid.begin(), eps_grid.end());
  rep.evidence.columns = {"R", "p_plus", "q_minus", "gap"};
  std::vector<std::vector<double>> low(eps_grid.size()), high(eps_grid.size());
  for (std::size_t j = 0; j < eps_grid.size(); ++j) {
    rep.evidence.columns.push_back("p_low_measure[eps=" + fmt(eps_grid[j]) + "]");
    rep.evidence.columns.push_back("q_high_measure[eps=" + fmt(eps_grid[j]) + "]");
    for (std::size_t k = 0; k < m; ++k) {
      const double e = eps_grid[j];
      low[j].push_back(measure_where(parts[k], [&](std::size_t c) { return p.at_box(c) <= s_p - e; }));
      high[j].push_back(measure_where(parts[k], [&](std::size_t c) { return q.at_box(c) >= s_q + e; }));
    }
  }
  for (std::size_t k = 0; k < m; ++k) {
    std::vector<double> row = {schedule.radii[k], p_plus[k], q_minus[k], gap[k]};
    for (std::size_t j = 0; j < eps_grid.size(); ++j) {
      row.push_back(low[j][k]);
      row.push_back(high[j][k]);
    }
    rep.evidence.rows.push_back(std::move(row));
  }

  const double d1 = std::fabs(gap[m - 1] - gap[m - 2]);
  const double d2 = std::fabs(gap[m - 2] - gap[m - 3]);
  const bool gap_stable = d1 < kDeltaGrow && d2 < kDeltaGrow;
  // Truncated gaps are non-increasing in R. When the last increments contract
  // at least geometrically (ratio <= 1/2) the remaining drop is bounded by the
  // geometric tail, which gives a projected limit.
  double gap_limit = gap[m - 1];
  const bool contracting = d2 > 0 && d1 <= 0.5 * d2;
  if (contracting) gap_limit -= d1 * (d1 / d2) / (1 - d1 / d2);
  if (gap[m - 1] < -kEpsTie) {
    rep.verdict = Verdict::fails;
    rep.notes.push_back("p_+ exceeds q_- on the largest truncation");
    return rep;
  }
  if ((gap_stable || contracting) && gap_limit > eps_min) {
    rep.verdict = Verdict::fails;
    rep.parameters.emplace_back("gap_limit", gap_limit);
    rep.notes.push_back("q_- - p_+ settles at a positive value");
    return rep;
  }
  const bool gap_resolved = gap_stable && gap[m - 1] <= eps_min;
  bool all_stable = true;
  for (std::size_t j = 0; j < eps_grid.size(); ++j) {
    for (const auto* series : {&low[j], &high[j]}) {
      const Trend t = classify_growth(*series);
      if (t == Trend::growing) {
        rep.verdict = Verdict::fails;
        rep.notes.push_back(std::string(series == &low[j] ? "{p <= s - eps}" : "{q >= s + eps}") +
                            " grows without bound at eps = " + fmt(eps_grid[j]));
        return rep;
      }
      if (t != Trend::stable) all_stable = false;
    }
  }
  rep.verdict = all_stable ? Verdict::holds : Verdict::inconclusive;
  rep.parameters.emplace_back("gap_resolved", gap_resolved ? 1.0 : 0.0);
  if (!gap_resolved)
    rep.notes.push_back("q_- - p_+ has not settled on this schedule; verdict rests on the exceptional sets");
  rep.notes.push_back("finite measure certified only by stabilization on the schedule");
  return rep;
}

DefectField defect_exponent(const ExponentField& p, const ExponentField& q) {
  require_common_domain(p, q);
  const auto& dom = p.domain();
  std::vector<double> r;
  auto dmask = restrict_mask(dom, [&](std::size_t c) {
    const double pv = p.at_box(c), qv = q.at_box(c);
    return qv - pv > kEpsTie && (1.0 / pv - 1.0 / qv) > 0;
  });
  DefectField out;
  out.d = share(std::move(dmask));
  if (out.d->empty()) return out;
  r.reserve(out.d->cell_count());
  for (std::size_t c : out.d->cells()) {
    const double pv = p.at_box(c), qv = q.at_box(c);
    r.push_back(pv * qv / (qv - pv));
  }
  out.r.emplace(out.d, std::move(r));
  return out;
}

ConditionReport defect_integral_estimate(const DefectField& rf, double lambda,
                                         const TruncationSchedule& schedule) {
  if (!(lambda > 1) || !std::isfinite(lambda)) throw GridError("lambda must be a finite value > 1");
  schedule.validate();
  if (schedule.radii.size() < 3) throw GridError("truncation schedule needs at least three radii");
  ConditionReport rep;
  rep.condition = "defect_integral";
  rep.parameters = {{"lambda", lambda}, {"delta_stab", kDeltaStab}, {"delta_grow", kDeltaGrow}};
  rep.evidence.columns = {"R", "integral", "increment"};
  if (!rf.r) {
    rep.verdict = Verdict::holds;
    rep.notes.push_back("D is empty; the integral is 0");
    for (double r : schedule.radii) rep.evidence.rows.push_back({r, 0.0, 0.0});
    return rep;
  }
  const auto& d = *rf.d;
  const double log_lambda = std::log(lambda);
  // Cells sorted by center norm so each truncation extends the previous sum.
  std::vector<std::size_t> order(d.cells().begin(), d.cells().end());
  std::vector<double> norms(d.box_size());
  for (std::size_t c : order) norms[c] = d.center_norm(c);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return norms[a] < norms[b]; });
  std::vector<double> partial;
  ExactSum acc;
  std::size_t next = 0;
  for (double radius : schedule.radii) {
    for (; next < order.size() && norms[order[next]] <= radius; ++next)
      acc.add(std::exp(-rf.r->at_box(order[next]) * log_lambda));
    partial.push_back(acc.value() * d.cell_volume());
  }
  const auto inc = increments(partial);
  for (std::size_t k = 0; k < partial.size(); ++k)
    rep.evidence.rows.push_back({schedule.radii[k], partial[k], inc[k]});
  const std::size_t m = inc.size();
  const bool decreasing = inc[m - 3] >= inc[m - 2] && inc[m - 2] >= inc[m - 1];
  if (decreasing && inc[m - 1] < kDeltaStab * (1 + partial[m - 1])) {
    rep.verdict = Verdict::holds;
    rep.notes.push_back("convergent");
  } else if (last_three_nondecreasing_above(inc, kDeltaGrow)) {
    rep.verdict = Verdict::fails;
    rep.notes.push_back("divergent");
  } else {
    rep.verdict = Verdict::inconclusive;
  }
  return rep;
}

ConditionReport check_embedding(const ExponentField& p, const ExponentField& q,
                                const TruncationSchedule& schedule,
                                const std::vector<double>& lambdas) {
  require_common_domain(p, q);
  ConditionReport rep;
  rep.condition = "embedding";
  for (double l : lambdas) rep.parameters.emplace_back("lambda", l);
  for (std::size_t c : p.domain().cells()) {
    if (p.at_box(c) > q.at_box(c) + kEpsTie) {
      rep.verdict = Verdict::fails;
      const auto x = p.domain().center(c);
      rep.notes.push_back("p > q at x = " + fmt(x[0]));
      return rep;
    }
  }
  const DefectField rf = defect_exponent(p, q);
  bool any_unclear = false;
  rep.evidence.columns = {"R"};
  for (std::size_t k = 0; k < schedule.radii.size(); ++k) rep.evidence.rows.push_back({schedule.radii[k]});
  Verdict best = Verdict::fails;
  for (double l : lambdas) {
    const ConditionReport one = defect_integral_estimate(rf, l, schedule);
    rep.evidence.columns.push_back("integral[lambda=" + fmt(l) + "]");
    for (std::size_t k = 0; k < one.evidence.rows.size(); ++k) rep.evidence.rows[k].push_back(one.evidence.rows[k][1]);
    rep.notes.push_back("lambda = " + fmt(l) + ": " + verdict_name(one.verdict));
    if (one.verdict == Verdict::holds) best = Verdict::holds;
    if (one.verdict == Verdict::inconclusive) any_unclear = true;
  }
  rep.verdict = best == Verdict::holds ? Verdict::holds : (any_unclear ? Verdict::inconclusive : Verdict::fails);
  return rep;
}

OmegaCertificate build_omega(const ExponentField& p, const ExponentField& q, double lambda,
                             double kappa, const TruncationSchedule& schedule) {
  require_common_domain(p, q);
  if (!(lambda > 1) || !std::isfinite(lambda)) throw GridError("lambda must be a finite value > 1");
  const auto parts = truncations(p.domain(), schedule);
  OmegaCertificate cert;
  cert.issued = true;
  cert.lambda = lambda;
  cert.kappa = kappa;
  cert.p_plus = ess_range(p).hi;
  const DefectField rf = defect_exponent(p, q);
  cert.d = rf.d;
  cert.report.condition = "omega";
  cert.report.parameters = {{"lambda", lambda}, {"kappa", kappa}, {"p_plus", cert.p_plus}};
  const double log_lambda = std::log(lambda);
  cert.omega_in_range = true;
  if (rf.r) {
    std::vector<double> w;
    w.reserve(rf.d->cell_count());
    // Exponents are tracked in units of log(lambda) so huge bounds stay finite.
    double ep = 0.0, eq = 0.0;
    for (std::size_t c : rf.d->cells()) {
      const double pv = p.at_box(c), qv = q.at_box(c), rv = rf.r->at_box(c);
      if (qv > kappa) {
        w.push_back(1.0);
        continue;
      }
      const double t = rv / pv;  // omega = lambda^{-t}
      const double v = std::pow(lambda, -t);
      w.push_back(v);
      if (!(v > 0 && v <= 1)) cert.omega_in_range = false;
      ep = std::max(ep, std::fabs(cert.p_plus - pv) * t);
      eq = std::max(eq, std::fabs(qv - cert.p_plus) * t);
    }
    cert.omega.emplace(rf.d, std::move(w));
    cert.exponent_p = ep;
    cert.exponent_q = eq;
  }
  cert.sup_p = std::exp(cert.exponent_p * log_lambda);
  cert.sup_q = std::exp(cert.exponent_q * log_lambda);
  const double slack = 1e-12 * std::max(1.0, kappa);
  cert.sup_bounds_hold = cert.exponent_p <= kappa + slack && cert.exponent_q <= kappa + slack;
  cert.product_bound_holds = cert.exponent_p + cert.exponent_q <= 2 * kappa + 2 * slack;

  cert.report.evidence.columns = {"R", "rho_p_D(omega)", "measure_E"};
  for (std::size_t k = 0; k < parts.size(); ++k) {
    double rho = 0.0;
    if (cert.omega) {
      const GridDomain dk = ball_restrict(*rf.d, schedule.radii[k]);
      ExactSum s;
      for (std::size_t c : dk.cells()) {
        bool overflow = false;
        s.add(pow_abs(cert.omega->at_box(c), p.at_box(c), overflow));
      }
      rho = s.value() * dk.cell_volume();
    }
    const double me = measure_where(parts[k], [&](std::size_t c) {
      return rf.d->contains(c) && q.at_box(c) > kappa;
    });
    cert.partial_modulars.push_back(rho);
    cert.report.evidence.rows.push_back({schedule.radii[k], rho, me});
    cert.measure_e = me;
  }
  const std::size_t m = cert.partial_modulars.size();
  const double last = cert.partial_modulars[m - 1];
  const double inc = last - cert.partial_modulars[m - 2];
  cert.modular_stabilized = inc <= 1e-6 * std::max(last, std::numeric_limits<double>::min());
  if (last == 0.0) cert.modular_stabilized = true;
  cert.report.verdict = cert.omega_in_range && cert.sup_bounds_hold && cert.product_bound_holds &&
                                cert.modular_stabilized
                            ? Verdict::holds
                            : Verdict::inconclusive;
  cert.report.parameters.emplace_back("exponent_p", cert.exponent_p);
  cert.report.parameters.emplace_back("exponent_q", cert.exponent_q);
  return cert;
}

OmegaCertificate construct_omega(const ExponentField& p, const ExponentField& q, double lambda,
                                 const TruncationSchedule& schedule, const OmegaOptions& opts) {
  require_common_domain(p, q);
  const ConditionReport touching = check_touching(p, q, schedule, opts.touching_eps);
  auto withheld = [&](std::string why, ConditionReport rep) {
    OmegaCertificate cert;
    cert.issued = false;
    cert.lambda = lambda;
    cert.reason = std::move(why);
    cert.report = std::move(rep);
    cert.report.condition = "omega";
    cert.report.verdict = Verdict::inconclusive;
    return cert;
  };
  if (touching.verdict == Verdict::fails) return withheld("p and q do not touch at infinity", touching);
  const double p_plus = ess_range(p).hi;
  std::vector<double> kappas = opts.kappa_candidates;
  if (kappas.empty()) kappas = {p_plus + 1.0, p_plus + 0.5, p_plus + 0.25};
  std::sort(kappas.begin(), kappas.end());
  const auto parts = truncations(p.domain(), schedule);
  ConditionReport search;
  search.condition = "kappa_search";
  search.evidence.columns = {"R"};
  for (double r : schedule.radii) search.evidence.rows.push_back({r});
  std::optional<double> chosen;
  for (double kappa : kappas) {
    std::vector<double> me;
    for (const auto& part : parts)
      me.push_back(measure_where(part, [&](std::size_t c) { return q.at_box(c) > kappa; }));
    search.evidence.columns.push_back("measure_E[kappa=" + fmt(kappa) + "]");
    for (std::size_t k = 0; k < me.size(); ++k) search.evidence.rows[k].push_back(me[k]);
    const Trend t = classify_growth(me);
    search.notes.push_back("kappa = " + fmt(kappa) + ": E_{q,kappa} " +
                           (t == Trend::stable ? "stabilizes" : t == Trend::growing ? "grows" : "unclear"));
    if (t == Trend::stable && !chosen) chosen = kappa;
  }
  if (!chosen) return withheld("no admissible kappa: no candidate E_{q,kappa} stabilizes on the schedule", search);
  OmegaCertificate cert = build_omega(p, q, lambda, *chosen, schedule);
  for (auto& n : search.notes) cert.report.notes.push_back(n);
  cert.report.notes.push_back("finite |E_{q,kappa}| certified only by stabilization on the schedule");
  return cert;
}

ConditionReport check_lerner(const ExponentField& p) {
  ConditionReport rep;
  rep.condition = "constant_exponent";
  const Range r = ess_range(p);
  rep.verdict = (r.hi - r.lo <= kEpsTie && r.lo > 1) ? Verdict::holds : Verdict::fails;
  rep.evidence.columns = {"R", "p_minus", "p_plus"};
  double rmax = 0;
  for (std::size_t c : p.domain().cells()) rmax = std::max(rmax, p.domain().center_norm(c));
  rep.evidence.rows.push_back({rmax, r.lo, r.hi});
  rep.parameters = {{"eps_tie", kEpsTie}};
  return rep;
}

std::vector<Window> enumerate_cubes(const GridDomain& dom) {
  std::vector<Window> out;
  const auto nx = static_cast<std::ptrdiff_t>(dom.nx());
  const auto ny = static_cast<std::ptrdiff_t>(dom.ny());
  if (dom.dim() == 1) {
    for (std::ptrdiff_t len = 1; len <= nx; ++len)
      for (std::ptrdiff_t a = 0; a + len <= nx; ++a) out.push_back({{a, 0}, static_cast<std::size_t>(len)});
    return out;
  }
  const std::ptrdiff_t kmax = std::max(nx, ny);
  for (std::ptrdiff_t k = 1; k <= kmax; ++k)
    for (std::ptrdiff_t ay = -(k - 1); ay < ny; ++ay)
      for (std::ptrdiff_t ax = -(k - 1); ax < nx; ++ax) out.push_back({{ax, ay}, static_cast<std::size_t>(k)});
  return out;
}

GridDomain cube_region(const GridDomain& dom, const Window& cube) {
  const auto nx = static_cast<std::ptrdiff_t>(dom.nx());
  const auto k = static_cast<std::ptrdiff_t>(cube.size);
  return restrict_mask(dom, [&](std::size_t c) {
    const auto ix = static_cast<std::ptrdiff_t>(c) % nx;
    const auto iy = static_cast<std::ptrdiff_t>(c) / nx;
    const bool in_x = ix >= cube.start[0] && ix < cube.start[0] + k;
    const bool in_y = dom.dim() == 1 || (iy >= cube.start[1] && iy < cube.start[1] + k);
    return in_x && in_y;
  });
}

std::optional<std::pair<double, double>> cube_extremes(const ExponentField& p, const ExponentField& q,
                                                       const Window& cube) {
  const auto& dom = p.domain();
  const auto nx = static_cast<std::ptrdiff_t>(dom.nx());
  const auto ny = static_cast<std::ptrdiff_t>(dom.ny());
  const auto k = static_cast<std::ptrdiff_t>(cube.size);
  const std::ptrdiff_t x0 = std::max<std::ptrdiff_t>(cube.start[0], 0), x1 = std::min(cube.start[0] + k, nx);
  std::ptrdiff_t y0 = 0, y1 = 1;
  if (dom.dim() == 2) {
    y0 = std::max<std::ptrdiff_t>(cube.start[1], 0);
    y1 = std::min(cube.start[1] + k, ny);
  }
  double pp = -std::numeric_limits<double>::infinity();
  double qm = std::numeric_limits<double>::infinity();
  bool any = false;
  for (std::ptrdiff_t y = y0; y < y1; ++y) {
    for (std::ptrdiff_t x = x0; x < x1; ++x) {
      const auto c = static_cast<std::size_t>(y * nx + x);
      if (!dom.contains(c)) continue;
      any = true;
      pp = std::max(pp, p.at_box(c));
      qm = std::min(qm, q.at_box(c));
    }
  }
  if (!any) return std::nullopt;
  return std::make_pair(pp, qm);
}

bool all_cubes_satisfy(const ExponentField& p, const ExponentField& q) {
  require_common_domain(p, q);
  for (const Window& w : enumerate_cubes(p.domain())) {
    const auto e = cube_extremes(p, q, w);
    if (e && e->first > e->second + kEpsTie) return false;
  }
  return true;
}

}  // namespace vlab
