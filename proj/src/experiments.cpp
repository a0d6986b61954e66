#include "vlab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

#include "vlab/exact_sum.hpp"
#include "vlab/modular.hpp"

namespace vlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

GridFunction indicator(const DomainPtr& dom, const GridDomain& set, double value) {
  std::vector<double> v(dom->cell_count(), 0.0);
  for (std::size_t c : set.cells()) {
    const auto s = dom->slot(c);
    if (s >= 0) v[static_cast<std::size_t>(s)] = value;
  }
  return GridFunction(dom, std::move(v));
}

DomainPtr domain_of(const ExponentField& p) { return p.function().domain_ptr(); }

void require_common_domain(const ExponentField& p, const ExponentField& q) {
  if (!(p.domain() == q.domain())) throw GridError("p and q must be sampled on the same domain");
}

// Exact sum of |g|^e over region cells plus the cell-volume factor applied
// at the end; `e_at` gives the exponent per box cell.
template <class E>
ExactSum exact_modular(const GridFunction& g, const GridDomain& region, E e_at, bool& overflow) {
  ExactSum s;
  for (std::size_t c : region.cells()) {
    const double a = g.at_box(c);
    if (a == 0.0) continue;
    s.add(pow_abs(a, e_at(c), overflow));
  }
  return s;
}

double to_value(const ExactSum& s, double vol, bool overflow) {
  if (overflow) return kInf;
  const double v = s.value() * vol;
  return std::isfinite(v) ? v : kInf;
}

}  // namespace

// ---------------------------------------------------------------------------

std::vector<GridFunction> random_step_functions(const DomainPtr& dom, const FamilyOptions& opts) {
  if (!(opts.amp_lo > 0) || !(opts.amp_hi >= opts.amp_lo)) throw std::invalid_argument("bad amplitude range");
  if (opts.max_pieces < 1) throw std::invalid_argument("max_pieces must be >= 1");
  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> log_amp(std::log(opts.amp_lo), std::log(opts.amp_hi));
  std::uniform_int_distribution<std::size_t> pieces(1, opts.max_pieces);
  std::bernoulli_distribution negative(0.25);
  const std::size_t nx = dom->nx(), ny = dom->ny();
  std::vector<GridFunction> out;
  out.reserve(opts.count);
  for (std::size_t m = 0; m < opts.count; ++m) {
    std::vector<double> box(dom->box_size(), 0.0);
    const std::size_t np = pieces(rng);
    for (std::size_t k = 0; k < np; ++k) {
      std::uniform_int_distribution<std::size_t> ux(0, nx - 1), uy(0, ny - 1);
      std::size_t x0 = ux(rng), x1 = ux(rng), y0 = uy(rng), y1 = uy(rng);
      if (x0 > x1) std::swap(x0, x1);
      if (y0 > y1) std::swap(y0, y1);
      double amp = std::exp(log_amp(rng));
      if (negative(rng)) amp = -amp;
      for (std::size_t y = y0; y <= y1; ++y)
        for (std::size_t x = x0; x <= x1; ++x) box[y * nx + x] += amp;
    }
    std::vector<double> vals;
    vals.reserve(dom->cell_count());
    for (std::size_t c : dom->cells()) vals.push_back(box[c]);
    out.emplace_back(dom, std::move(vals));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Falsifier

const char* status_name(Witness::Status s) {
  switch (s) {
    case Witness::Status::witness: return "witness";
    case Witness::Status::none: return "none";
    case Witness::Status::budget_exhausted: return "budget_exhausted";
  }
  return "?";
}

namespace {

struct CubeChoice {
  Window cube;
  double p_plus = 0, q_minus = 0;
  bool found = false;
};

// Largest gap p_+(Q) - q_-(Q); ties go to the larger cube, then the smaller
// start (y before x).
bool better_cube(double gap, const Window& w, double best_gap, const Window& best) {
  if (gap != best_gap) return gap > best_gap;
  if (w.size != best.size) return w.size > best.size;
  if (w.start[1] != best.start[1]) return w.start[1] < best.start[1];
  return w.start[0] < best.start[0];
}

CubeChoice worst_cube(const ExponentField& p, const ExponentField& q) {
  const auto& dom = p.domain();
  CubeChoice best;
  double best_gap = -kInf;
  auto consider = [&](const Window& w, double pp, double qm) {
    const double gap = pp - qm;
    if (!best.found || better_cube(gap, w, best_gap, best.cube)) {
      best = {w, pp, qm, true};
      best_gap = gap;
    }
  };
  if (dom.dim() == 1) {
    const auto n = static_cast<std::ptrdiff_t>(dom.nx());
    for (std::ptrdiff_t a = 0; a < n; ++a) {
      double pp = -kInf, qm = kInf;
      bool any = false;
      for (std::ptrdiff_t e = a; e < n; ++e) {
        const auto c = static_cast<std::size_t>(e);
        if (dom.contains(c)) {
          any = true;
          pp = std::max(pp, p.at_box(c));
          qm = std::min(qm, q.at_box(c));
        }
        if (any) consider({{a, 0}, static_cast<std::size_t>(e - a + 1)}, pp, qm);
      }
    }
    return best;
  }
  for (const Window& w : enumerate_cubes(dom)) {
    const auto e = cube_extremes(p, q, w);
    if (e) consider(w, e->first, e->second);
  }
  return best;
}

}  // namespace

Witness falsify(const ExponentField& p, const ExponentField& q, const FalsifyOptions& opts) {
  require_common_domain(p, q);
  if (opts.budget < 1) throw std::invalid_argument("falsify budget must be >= 1");
  Witness w;
  w.c1 = opts.c1;
  w.c2 = opts.c2;
  w.threshold = opts.threshold;
  const DomainPtr dom = domain_of(p);
  const CubeChoice choice = worst_cube(p, q);
  if (!choice.found || choice.p_plus <= choice.q_minus + kEpsTie) {
    w.status = Witness::Status::none;
    w.notes.push_back("every cube satisfies p_+(Q) <= q_-(Q)");
    return w;
  }
  w.cube = choice.cube;
  w.p_plus_q = choice.p_plus;
  w.q_minus_q = choice.q_minus;
  const double gap = choice.p_plus - choice.q_minus;
  w.alpha = choice.q_minus + gap / 3;
  w.beta = choice.q_minus + 2 * gap / 3;
  const GridDomain qreg = cube_region(*dom, w.cube);
  w.e_alpha = share(restrict_mask(qreg, [&](std::size_t c) { return q.at_box(c) <= w.alpha; }));
  w.e_beta = share(restrict_mask(qreg, [&](std::size_t c) { return p.at_box(c) >= w.beta; }));
  const double vol = dom->cell_volume();
  w.measure_cube = std::pow(static_cast<double>(w.cube.size), dom->dim()) * vol;
  w.measure_e_alpha = w.e_alpha->measure();
  w.measure_e_beta = w.e_beta->measure();

  const GridFunction chi = indicator(dom, *w.e_alpha, 1.0);
  const GridFunction mchi = maximal_fast(chi).mf;
  w.status = Witness::Status::budget_exhausted;
  for (int j = 1; j <= opts.budget; ++j) {
    const double lambda = std::ldexp(1.0, j);
    TrajectoryPoint t;
    t.lambda = lambda;
    // M(lambda chi) = lambda M(chi) exactly: scaling by a power of two.
    t.lhs = modular(mchi.scaled(lambda), p).value;
    t.rhs = opts.c1 * modular(chi.scaled(lambda), q).value + opts.c2;
    const double ratio = lambda * w.measure_e_alpha / w.measure_cube;
    t.lhs_bound = w.measure_e_beta * std::pow(ratio, w.beta);
    t.rhs_bound = opts.c1 * w.measure_e_alpha * std::pow(lambda, w.alpha) + opts.c2;
    t.radius = 0;
    w.trajectory.push_back(t);
    if (t.lhs > opts.threshold * t.rhs) {
      w.status = Witness::Status::witness;
      break;
    }
  }
  if (w.status == Witness::Status::budget_exhausted)
    w.notes.push_back("ratio stayed below the threshold for every lambda in the budget");
  return w;
}

Witness falsify_tail(const ExponentField& p, const ExponentField& q, const TruncationSchedule& s,
                     const FalsifyOptions& opts) {
  require_common_domain(p, q);
  const auto& dom = p.domain();
  if (dom.dim() != 1) throw std::invalid_argument("tail falsifier is one-dimensional");
  s.validate();
  Witness w;
  w.mode = "tail";
  w.c1 = opts.c1;
  w.c2 = opts.c2;
  w.threshold = opts.threshold;
  const double p_plus = ess_range(p).hi;
  w.p_plus_q = p_plus;
  w.alpha = p_plus + opts.tail_eps;  // q >= alpha on E
  w.beta = p_plus;
  w.status = Witness::Status::budget_exhausted;
  for (double radius : s.radii) {
    const GridDomain part = ball_restrict(dom, radius);
    const GridDomain e = restrict_mask(part, [&](std::size_t c) { return q.at_box(c) >= w.alpha; });
    if (e.empty()) continue;
    // Work on the bounding interval of the truncation: windows there give a
    // lower bound for M on the full grid, and rho_p(Mf) >= rho_p(f) anyway.
    const std::size_t i0 = part.cells().front(), i1 = part.cells().back();
    const std::size_t n = i1 - i0 + 1;
    std::vector<std::uint8_t> mask(n, 0);
    for (std::size_t c : part.cells()) mask[c - i0] = 1;
    const double origin = dom.origin()[0] + static_cast<double>(i0) * dom.h();
    auto sub = share(GridDomain(1, {origin, 0.0}, dom.h(), {n, 1}, mask));
    std::vector<double> pv, qv, chi;
    for (std::size_t c : sub->cells()) {
      pv.push_back(p.at_box(c + i0));
      qv.push_back(q.at_box(c + i0));
      chi.push_back(e.contains(c + i0) ? 1.0 : 0.0);
    }
    const ExponentField ps(GridFunction(sub, pv)), qs(GridFunction(sub, qv));
    const GridFunction f1(sub, chi);
    const GridFunction m1 = maximal_fast(f1).mf;
    TrajectoryPoint best;
    double best_ratio = -1;
    for (int j = 0; j <= opts.budget; ++j) {
      const double lambda = std::ldexp(1.0, -j);
      TrajectoryPoint t;
      t.radius = radius;
      t.lambda = lambda;
      t.lhs = modular(m1.scaled(lambda), ps).value;
      t.rhs = opts.c1 * modular(f1.scaled(lambda), qs).value + opts.c2;
      t.lhs_bound = e.measure() * std::pow(lambda, p_plus);
      t.rhs_bound = opts.c1 * e.measure() * std::pow(lambda, w.alpha) + opts.c2;
      const double ratio = t.lhs / t.rhs;
      if (ratio > best_ratio) {
        best_ratio = ratio;
        best = t;
      }
    }
    w.trajectory.push_back(best);
    w.measure_e_alpha = e.measure();
    if (best_ratio > opts.threshold) {
      w.status = Witness::Status::witness;
      break;
    }
  }
  if (w.trajectory.empty()) {
    w.status = Witness::Status::none;
    w.notes.push_back("{q >= p_+ + eps} is empty on every truncation");
    return w;
  }
  if (w.status == Witness::Status::budget_exhausted) {
    const auto& t = w.trajectory;
    const std::size_t m = t.size();
    bool rising = m >= 3;
    for (std::size_t k = m >= 3 ? m - 2 : 0; rising && k < m; ++k)
      rising = t[k].lhs / t[k].rhs > t[k - 1].lhs / t[k - 1].rhs;
    w.notes.push_back(rising ? "best ratio still rising across the last truncations; the limit cannot be certified"
                             : "best ratio did not reach the threshold");
  }
  return w;
}

// ---------------------------------------------------------------------------
// Constants

InequalityReport estimate_constants(const ExponentField& p, const ExponentField& q, const Operator& t,
                                    const ConstantsOptions& opts, const OmegaCertificate* cert) {
  require_common_domain(p, q);
  InequalityReport rep;
  rep.operator_name = t.name();
  rep.safety = opts.safety;
  rep.mode = cert ? "certificate" : "bounded";
  const DomainPtr dom = domain_of(p);
  rep.measure = dom->measure();
  rep.p_plus = ess_range(p).hi;
  if (!cert) {
    const ConditionReport fm = check_finite_measure(p, q);
    if (fm.verdict != Verdict::holds) {
      rep.status = "refused";
      rep.notes.push_back("p_+ > q_-: the inequality cannot hold; run falsify for a witness");
      return rep;
    }
  } else if (!cert->issued || cert->report.verdict != Verdict::holds) {
    rep.status = "refused";
    rep.notes.push_back("omega certificate missing or not verified");
    return rep;
  }
  if (!t.bounded_on(rep.p_plus)) {
    rep.status = "refused";
    rep.notes.push_back("operator " + t.name() + " is not bounded on L^" + fmt(rep.p_plus));
    return rep;
  }
  const auto calibration = random_step_functions(dom, opts.calibration);
  for (const auto& f : calibration) {
    const double den = modular(f, rep.p_plus).value;
    if (!(den > 0) || std::isinf(den)) continue;
    const GridFunction tf = t.apply(f);
    rep.c_hat = std::max(rep.c_hat, modular(tf, rep.p_plus).value / den);
  }
  const double c = opts.safety * rep.c_hat;
  if (cert) {
    rep.sup_p = cert->sup_p;
    rep.sup_q = cert->sup_q;
    rep.rho_omega = cert->partial_modulars.empty() ? 0.0 : cert->partial_modulars.back();
    rep.c1 = c * (1 + rep.sup_p) * (1 + rep.sup_q);
    rep.c2 = (c * (1 + rep.sup_p) + 1) * rep.rho_omega;
  } else {
    rep.c1 = c;
    rep.c2 = (c + 1) * rep.measure;
  }

  const auto holdout = random_step_functions(dom, opts.holdout);
  bool all_pass = true;
  for (std::size_t i = 0; i < holdout.size(); ++i) {
    const GridFunction& f = holdout[i];
    const GridFunction tf = t.apply(f);
    if (!(tf.domain() == p.domain()))
      throw GridError("operator output must live on the exponent's domain");
    MemberResult m;
    m.index = i;
    const double vol = dom->cell_volume();
    bool of = false;
    const ExactSum lhs = exact_modular(tf, *dom, [&](std::size_t b) { return p.at_box(b); }, of);
    const ExactSum rq = exact_modular(f, *dom, [&](std::size_t b) { return q.at_box(b); }, of);
    m.lhs = to_value(lhs, vol, of);
    m.rho_q = to_value(rq, vol, of);
    m.rhs = rep.c1 * m.rho_q + rep.c2;
    m.pass = m.lhs <= m.rhs;
    // I over {Tf > 1} (or D), F = int |f|^{p_+} over {|f| > 1} (or D).
    GridDomain split_i = cert ? *cert->d : restrict_mask(tf, [](double v) { return std::fabs(v) > 1; });
    GridDomain split_f = cert ? *cert->d : restrict_mask(f, [](double v) { return std::fabs(v) > 1; });
    const GridDomain rest_i = restrict_mask(*dom, [&](std::size_t b) { return !split_i.contains(b); });
    const GridDomain rest_f = restrict_mask(*dom, [&](std::size_t b) { return !split_f.contains(b); });
    auto pe = [&](std::size_t b) { return p.at_box(b); };
    auto pp = [&](std::size_t) { return rep.p_plus; };
    const ExactSum is = exact_modular(tf, split_i, pe, of), ir = exact_modular(tf, rest_i, pe, of);
    const ExactSum ftot = exact_modular(f, *dom, pp, of);
    const ExactSum fs = exact_modular(f, split_f, pp, of), fr = exact_modular(f, rest_f, pp, of);
    m.i_split = to_value(is, vol, of);
    m.i_rest = to_value(ir, vol, of);
    m.f_split = to_value(fs, vol, of);
    m.f_rest = to_value(fr, vol, of);
    m.decomposition_exact = (is + ir == lhs) && (fs + fr == ftot);
    rep.decomposition_exact = rep.decomposition_exact && m.decomposition_exact;
    if (m.rho_q > 0)
      rep.max_identity_deviation = std::max(rep.max_identity_deviation, std::fabs(m.lhs - m.rho_q) / m.rho_q);
    all_pass = all_pass && m.pass;
    rep.holdout.push_back(m);
  }
  rep.status = all_pass ? "validated" : "violated";
  if (!all_pass) rep.notes.push_back("holdout violation: the empirical constant is too small; enlarge the calibration family");
  return rep;
}

// ---------------------------------------------------------------------------
// Log-Hoelder diagnostic and the error-term inequality

LogHolderDiagnostic log_holder_diagnostic(const ExponentField& p) {
  const auto& dom = p.domain();
  LogHolderDiagnostic d;
  const auto cells = dom.cells();
  // p_inf: value at the cell farthest from the origin.
  std::size_t far = cells.front();
  for (std::size_t c : cells)
    if (dom.center_norm(c) > dom.center_norm(far)) far = c;
  d.p_inf = p.at_box(far);
  for (std::size_t c : cells) {
    const double v = std::fabs(p.at_box(c) - d.p_inf) * std::log(std::numbers::e + dom.center_norm(c));
    if (v > d.c_inf) {
      d.c_inf = v;
      d.c_inf_at = dom.center(c)[0];
    }
  }
  const double h = dom.h();
  const auto reach = static_cast<std::ptrdiff_t>(std::ceil(0.5 / h));
  const auto nx = static_cast<std::ptrdiff_t>(dom.nx());
  const auto ny = static_cast<std::ptrdiff_t>(dom.ny());
  for (std::size_t c : cells) {
    const auto ix = static_cast<std::ptrdiff_t>(c) % nx, iy = static_cast<std::ptrdiff_t>(c) / nx;
    const auto pc = dom.center(c);
    for (std::ptrdiff_t dy = dom.dim() == 2 ? -reach : 0; dy <= (dom.dim() == 2 ? reach : 0); ++dy) {
      for (std::ptrdiff_t dx = -reach; dx <= reach; ++dx) {
        // Each unordered pair once.
        if (dy < 0 || (dy == 0 && dx <= 0)) continue;
        const std::ptrdiff_t jx = ix + dx, jy = iy + dy;
        if (jx < 0 || jx >= nx || jy < 0 || jy >= ny) continue;
        const auto o = static_cast<std::size_t>(jy * nx + jx);
        if (!dom.contains(o)) continue;
        const auto po = dom.center(o);
        const double dist = std::hypot(po[0] - pc[0], po[1] - pc[1]);
        if (!(dist < 0.5)) continue;
        const double v = std::fabs(p.at_box(c) - p.at_box(o)) * -std::log(dist);
        if (v > d.c0) {
          d.c0 = v;
          d.c0_pair = {pc[0], po[0]};
        }
      }
    }
  }
  return d;
}

std::vector<LogHolderDiagnostic> log_holder_refinement(const Expr& p, double a, double b,
                                                       const std::vector<double>& hs) {
  std::vector<LogHolderDiagnostic> out;
  for (double h : hs) {
    const DomainPtr dom = share(make_interval(a, b, h));
    out.push_back(log_holder_diagnostic(sample_exponent(p, dom)));
  }
  return out;
}

LogCheckReport modular_log_check(const ExponentField& p, const std::vector<GridFunction>& family,
                                 double rtol) {
  LogCheckReport rep;
  const auto& dom = p.domain();
  const double p_minus = ess_range(p).lo;
  ExactSum tail;
  for (std::size_t c : dom.cells())
    tail.add(std::pow(std::numbers::e + dom.center_norm(c), -dom.dim() * p_minus));
  rep.tail_integral = tail.value() * dom.cell_volume();
  rep.diagnostic = log_holder_diagnostic(p);
  for (const auto& f : family) {
    const double nf = luxemburg_norm(f, p, rtol);
    if (nf == 0.0) continue;
    const GridFunction g = f.scaled(1.0 / nf);
    if (luxemburg_norm(g, p, rtol) > 1.0 + rtol) rep.all_in_unit_ball = false;
    const double lhs = modular(maximal_fast(g).mf, p).value;
    const double ratio = lhs / (modular(g, p).value + rep.tail_integral);
    rep.ratios.push_back(ratio);
    rep.c_star = std::max(rep.c_star, ratio);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Fourier variant

FourierCheckReport fourier_check(const ExponentField& p, const ExponentField& q,
                                 const std::optional<TruncationSchedule>& schedule,
                                 const ConstantsOptions& opts) {
  require_common_domain(p, q);
  FourierCheckReport rep;
  auto refuse = [&](std::string why) {
    rep.status = "refused";
    rep.reason = std::move(why);
    rep.constants.status = "refused";
    return rep;
  };
  const Range pr = ess_range(p);
  if (std::fabs(pr.hi - 2.0) > kEpsTie) return refuse("p_+ must equal 2");
  for (std::size_t c : p.domain().cells())
    if (p.at_box(c) > q.at_box(c) + kEpsTie) return refuse("q < p somewhere");
  if (p.domain().cell_count() != p.domain().box_size())
    return refuse("the Fourier operator needs a domain covering its whole bounding box");
  const FourierModulus fourier;
  if (!schedule) {
    rep.constants = estimate_constants(p, q, fourier, opts);
    rep.status = rep.constants.status;
    return rep;
  }
  rep.touching = check_touching(p, q, *schedule);
  if (rep.touching->verdict != Verdict::holds) return refuse("touching at infinity not verified");
  const DefectField rf = defect_exponent(p, q);
  double lambda = 0;
  for (double l : {1.5, 2.0, 4.0, 8.0}) {
    ConditionReport r = defect_integral_estimate(rf, l, *schedule);
    const bool ok = r.verdict == Verdict::holds;
    rep.integral = std::move(r);
    if (ok) {
      lambda = l;
      break;
    }
  }
  if (lambda == 0) return refuse("defect integral not verified convergent");
  rep.certificate = construct_omega(p, q, lambda, *schedule);
  if (!rep.certificate->issued || rep.certificate->report.verdict != Verdict::holds)
    return refuse("omega certificate withheld: " + rep.certificate->reason);
  rep.constants = estimate_constants(p, q, fourier, opts, &*rep.certificate);
  rep.status = rep.constants.status;
  return rep;
}

}  // namespace vlab
