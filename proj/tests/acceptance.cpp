// Acceptance criteria, one PASS/FAIL line each. `--criterion N` runs one.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "vlab/conditions.hpp"
#include "vlab/experiments.hpp"
#include "vlab/modular.hpp"

using namespace vlab;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

ExponentField exponent(const std::string& src, const DomainPtr& d) { return sample_exponent(*parse(src), d); }

GridFunction random_values(const DomainPtr& d, std::mt19937_64& rng, double lo, double hi, bool coarse) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(d->cell_count());
  for (double& x : v) x = coarse ? std::round(u(rng) * 2) / 2 : u(rng);
  return GridFunction(d, std::move(v));
}

bool same(const MaxOpResult& a, const MaxOpResult& b) {
  const auto x = a.mf.values(), y = b.mf.values();
  return std::equal(x.begin(), x.end(), y.begin(), y.end()) && a.windows == b.windows;
}

Outcome oracle_equivalence() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<int> n1(1, 256), n2(1, 32);
  int mismatches = 0;
  for (int t = 0; t < 200; ++t) {
    const auto d = share(make_interval(0, n1(rng), 1));
    const GridFunction f = random_values(d, rng, -5, 5, t % 3 == 0);
    if (!same(maximal_fast(f), maximal_oracle(f))) ++mismatches;
  }
  for (int t = 0; t < 20; ++t) {
    const auto d = share(make_box({0, 0}, {double(n2(rng)), double(n2(rng))}, 1));
    const GridFunction f = random_values(d, rng, -5, 5, t % 3 == 0);
    if (!same(maximal_fast(f), maximal_oracle(f))) ++mismatches;
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {mismatches == 0 && secs < 60, std::to_string(mismatches) + " mismatches in 220 grids, " + fmt(secs) + " s"};
}

Outcome step_counterexample() {
  const auto d = share(make_interval(0, 3, 0.01));
  const ExponentField p = exponent("piecewise(x >= 2 and x <= 3 : 3, else : 2)", d);
  Outcome o;
  std::vector<double> ratios;
  for (double k : {9.0, 27.0, 81.0}) {
    const GridFunction f = sample(*parse("chi(0, 1)"), d).scaled(k);
    const double rf = modular(f, p).value;
    const double rm = modular(maximal_fast(f).mf, p).value;
    if (rf != k * k) o.pass = false;
    if (!(rm >= k * k * k / 27)) o.pass = false;
    ratios.push_back(rm / rf);
    o.detail += "k=" + fmt(k) + ": rho(f)=" + fmt(rf) + " rho(Mf)=" + fmt(rm) + "; ";
  }
  const double factor = ratios[2] / ratios[0];
  if (!(factor >= 8)) o.pass = false;
  o.detail += "ratio growth k=81 vs k=9: " + fmt(factor) + " (needs >= 8)";
  return o;
}

Outcome norm_closed_form() {
  std::mt19937_64 rng(303);
  std::uniform_real_distribution<double> uc(0.1, 10), up(1, 8);
  const auto d = share(make_interval(0, 10, 0.1));
  std::uniform_int_distribution<std::size_t> ui(0, d->cell_count() - 1);
  double worst = 0;
  for (int t = 0; t < 50; ++t) {
    const double c = uc(rng), p = up(rng);
    std::size_t a = ui(rng), b = ui(rng);
    if (a > b) std::swap(a, b);
    std::vector<double> v(d->cell_count(), 0.0);
    for (std::size_t i = a; i <= b; ++i) v[i] = c;
    const double expect = c * std::pow(static_cast<double>(b - a + 1) * 0.1, 1 / p);
    const double got = luxemburg_norm(GridFunction(d, v), p, 1e-10);
    worst = std::max(worst, std::fabs(got - expect) / expect);
  }
  return {worst <= 1e-9, "max relative error " + fmt(worst)};
}

Outcome unit_ball() {
  std::mt19937_64 rng(404);
  const auto d = share(make_interval(-4, 4, 0.1));
  std::uniform_real_distribution<double> scale(0.5, 1.5), uc(0.01, 100);
  const double rtol = 1e-9;
  int disagreements = 0, outside_band = 0;
  double worst_h = 0;
  for (int t = 0; t < 100; ++t) {
    const ExponentField p(random_values(d, rng, 1, 8, false));
    const GridFunction f0 = random_values(d, rng, -3, 3, false);
    const double n0 = luxemburg_norm(f0, p, rtol);
    // Land near the unit sphere so both sides of the boundary are exercised.
    const GridFunction f = f0.scaled(scale(rng) / n0);
    const UnitBall u = unit_ball_check(f, p, rtol);
    if (u.modular_le_one != u.norm_le_one) {
      ++disagreements;
      if (std::fabs(u.norm - 1) > rtol) ++outside_band;
    }
    const double c = uc(rng);
    const double n = luxemburg_norm(f, p, rtol);
    worst_h = std::max(worst_h, std::fabs(luxemburg_norm(f.scaled(c), p, rtol) - c * n) / (c * n));
  }
  return {outside_band == 0 && worst_h <= 1e-8,
          std::to_string(disagreements) + " verdict disagreements (" + std::to_string(outside_band) +
              " outside the tolerance band), homogeneity error " + fmt(worst_h)};
}

Verdict verdict_of(const ExampleReport& r, const std::string& condition, std::size_t nth = 0) {
  for (const auto& c : r.conditions)
    if (c.condition == condition && nth-- == 0) return c.verdict;
  return Verdict::inconclusive;
}

Outcome fixtures() {
  Outcome o;
  auto expect = [&](const std::string& what, Verdict got, Verdict want) {
    o.detail += what + "=" + verdict_name(got) + " ";
    if (got != want) o.pass = false;
  };
  expect("ex-1.9a.touching", verdict_of(reproduce_example("ex-1.9a"), "touching"), Verdict::holds);
  expect("ex-1.9b.touching", verdict_of(reproduce_example("ex-1.9b"), "touching"), Verdict::fails);
  expect("ex-1.9c.touching", verdict_of(reproduce_example("ex-1.9c"), "touching"), Verdict::holds);
  const ExampleReport a = reproduce_example("rmk-1.8a");
  expect("rmk-1.8a.embedding", verdict_of(a, "embedding"), Verdict::holds);
  expect("rmk-1.8a.touching", verdict_of(a, "touching"), Verdict::fails);
  const ExampleReport b = reproduce_example("rmk-1.8b");
  expect("rmk-1.8b.touching", verdict_of(b, "touching"), Verdict::holds);
  for (std::size_t i = 0; i < 3; ++i)
    expect("rmk-1.8b.integral" + std::to_string(i), verdict_of(b, "defect_integral", i), Verdict::fails);
  expect("ex-1.2.finite_measure", verdict_of(reproduce_example("ex-1.2"), "finite_measure"), Verdict::fails);
  return o;
}

std::string cert_summary(const OmegaCertificate& c) {
  if (!c.issued) return "withheld (" + c.reason + ")";
  std::string s = "kappa=" + fmt(c.kappa) + " range=" + (c.omega_in_range ? "ok" : "bad") +
                  " sup=" + (c.sup_bounds_hold ? "ok" : "bad") + " product=" + (c.product_bound_holds ? "ok" : "bad");
  const auto& pm = c.partial_modulars;
  const double last = pm.back(), inc = last - pm[pm.size() - 2];
  s += " final_increment=" + fmt(last > 0 ? inc / last : 0.0);
  return s;
}

bool certified(const OmegaCertificate& c) {
  return c.issued && c.omega_in_range && c.sup_bounds_hold && c.product_bound_holds && c.modular_stabilized;
}

Outcome omega() {
  Outcome o;
  const double a = std::exp(9.0);
  const auto d = share(make_interval(a, 8192 * a, 162));
  const ExponentField p = exponent("2", d), q = exponent("2*loglog(x)/(loglog(x)-2)", d);
  const auto s = TruncationSchedule::geometric(2 * a, 12);
  OmegaOptions opts;
  opts.touching_eps = {2, 1, 0.5};
  const OmegaCertificate b = construct_omega(p, q, 2.0, s, opts);
  // The same construction forced at kappa = 3, for the record.
  const OmegaCertificate forced = build_omega(p, q, 2.0, 3.0, s);
  o.detail = "loglog pair: " + cert_summary(b) + "; forced kappa=3: " + cert_summary(forced) + "; ";
  if (!certified(b)) o.pass = false;

  const auto line = share(make_interval(-4096, 4096, 0.05));
  const ExponentField p2 = exponent("2", line), q2 = exponent("2 + chi(-1, 1)", line);
  const auto s2 = TruncationSchedule::geometric(1, 12);
  OmegaOptions pinned;
  pinned.kappa_candidates = {3.0};
  const OmegaCertificate c = construct_omega(p2, q2, 2.0, s2, pinned);
  const OmegaCertificate c_default = construct_omega(p2, q2, 2.0, s2);
  o.detail += "bounded-jump pair: " + cert_summary(c) + "; default kappa: " + cert_summary(c_default);
  if (!certified(c) || !certified(c_default)) o.pass = false;
  return o;
}

Outcome falsifier() {
  Outcome o;
  const auto d = share(make_interval(0, 3, 0.01));
  const ExponentField p = exponent("piecewise(x >= 2 and x <= 3 : 3, else : 2)", d);
  const Witness w = falsify(p, p);
  if (w.status != Witness::Status::witness) {
    o.pass = false;
    o.detail = "no witness on the step exponent; ";
  } else {
    const auto& t = w.trajectory.back();
    o.detail = "witness at lambda=" + fmt(t.lambda) + " ratio=" + fmt(t.lhs / t.rhs) + "; ";
    if (!(t.lhs > 1e3 * t.rhs) || t.lambda > std::ldexp(1.0, 20)) o.pass = false;
    // Independent re-verification from the stored sets.
    std::vector<double> chi(d->cell_count(), 0.0);
    for (std::size_t c : w.e_alpha->cells()) chi[static_cast<std::size_t>(d->slot(c))] = 1.0;
    int bad = 0;
    for (const auto& tp : w.trajectory) {
      const GridFunction f = GridFunction(d, chi).scaled(tp.lambda);
      const double lhs = modular(maximal_oracle(f).mf, p).value;
      const double rhs = w.c1 * modular(f, p).value + w.c2;
      const double avg = tp.lambda * w.measure_e_alpha / w.measure_cube;
      const double lhs_bound = w.measure_e_beta * std::pow(avg, w.beta);
      const double rhs_bound = w.c1 * w.measure_e_alpha * std::pow(tp.lambda, w.alpha) + w.c2;
      if (avg >= 1 && lhs < lhs_bound * (1 - 1e-12)) ++bad;
      if (rhs > rhs_bound * (1 + 1e-12)) ++bad;
      if (std::fabs(lhs - tp.lhs) > 1e-12 * lhs) ++bad;
    }
    for (std::size_t c : w.e_alpha->cells())
      if (p.at_box(c) > w.alpha) ++bad;
    for (std::size_t c : w.e_beta->cells())
      if (p.at_box(c) < w.beta) ++bad;
    o.detail += std::to_string(bad) + " re-verification failures; ";
    if (bad) o.pass = false;
  }
  const ExponentField two = exponent("2", d);
  const Witness none = falsify(two, two);
  o.detail += std::string("constant pair: ") + status_name(none.status);
  if (none.status != Witness::Status::none) o.pass = false;
  return o;
}

Outcome cube_equivalence() {
  std::mt19937_64 rng(808);
  std::uniform_int_distribution<int> n1(1, 64), n2(1, 8);
  int mismatches = 0, holds = 0;
  for (int t = 0; t < 500; ++t) {
    const bool two = t % 4 == 3;
    const DomainPtr d = two ? share(make_box({0, 0}, {double(n2(rng)), double(n2(rng))}, 1))
                            : share(make_interval(0, n1(rng), 1));
    const GridFunction pv = random_values(d, rng, 1, 4, true);
    const GridFunction qr = random_values(d, rng, 1, 4, true);
    std::vector<double> qv(qr.values().begin(), qr.values().end());
    if (t % 2 == 0) {
      // Push q up to (or just past) p_+ so both verdicts occur.
      const double lift = ess_range(ExponentField(pv)).hi - ess_range(ExponentField(qr)).lo;
      for (double& v : qv) v += std::max(0.0, lift) - (t % 4 == 0 ? 0.5 : 0.0);
      for (double& v : qv) v = std::max(v, 1.0);
    }
    const ExponentField p(pv), q(GridFunction(d, qv));
    const bool global = ess_range(p).hi <= ess_range(q).lo + kEpsTie;
    holds += global;
    if (all_cubes_satisfy(p, q) != global) ++mismatches;
  }
  return {mismatches == 0, std::to_string(mismatches) + " mismatches in 500 pairs (" + std::to_string(holds) +
                               " satisfy the global condition)"};
}

Outcome constants() {
  std::mt19937_64 rng(909);
  std::uniform_real_distribution<double> split(1.2, 3.5);
  int validated = 0;
  std::string statuses;
  for (int t = 0; t < 20; ++t) {
    const DomainPtr d = t % 4 == 3 ? share(make_box({0, 0}, {2, 2}, 0.25)) : share(make_interval(0, 2, 1.0 / 32));
    const double s = split(rng);
    const ExponentField p(random_values(d, rng, 1.1, s, false));
    const ExponentField q(random_values(d, rng, s, 5, false));
    const InequalityReport r = estimate_constants(p, q, MaximalOperator{});
    if (r.status == "validated" && r.holdout.size() == 50) ++validated;
    else statuses += r.status + " ";
  }
  return {validated == 20, std::to_string(validated) + "/20 pairs validated on 50 holdout functions " + statuses};
}

Outcome plancherel() {
  std::mt19937_64 rng(1010);
  const auto d = share(make_interval(-8, 8, 0.0625));
  const ExponentField two = exponent("2", d);
  double worst = 0;
  for (int t = 0; t < 50; ++t) {
    const GridFunction f = random_values(d, rng, -10, 10, false);
    const double lhs = modular(FourierModulus{}.apply(f), 2.0).value;
    const double rhs = modular(f, 2.0).value;
    worst = std::max(worst, std::fabs(lhs - rhs) / rhs);
  }
  ConstantsOptions opts;
  const FourierCheckReport r = fourier_check(two, two, std::nullopt, opts);
  const bool ok = worst <= 1e-9 && r.status == "validated" && r.constants.max_identity_deviation <= 1e-9;
  return {ok, "max relative deviation " + fmt(worst) + " on random inputs, " +
                  fmt(r.constants.max_identity_deviation) + " on the holdout family; fourier_check " + r.status};
}

struct Criterion {
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria = {
      {"maximal operator oracle equivalence", oracle_equivalence},
      {"step-exponent counterexample reproduction", step_counterexample},
      {"Luxemburg norm closed form", norm_closed_form},
      {"unit-ball equivalence and homogeneity", unit_ball},
      {"condition verdict fixtures", fixtures},
      {"omega certificate", omega},
      {"falsifier witness and soundness", falsifier},
      {"cube condition equals global condition", cube_equivalence},
      {"constant estimation on bounded domains", constants},
      {"Plancherel identity", plancherel},
  };
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) only = std::atoi(argv[++i]);
  }
  if (only < 0 || only > static_cast<int>(criteria.size())) {
    std::fprintf(stderr, "unknown criterion %d\n", only);
    return 2;
  }
  bool all = true;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (only && static_cast<int>(i) + 1 != only) continue;
    Outcome o;
    try {
      o = criteria[i].run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("criterion %zu: %s - %s: %s\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].name, o.detail.c_str());
    std::fflush(stdout);
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
