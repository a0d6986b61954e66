#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "vlab/experiments.hpp"
#include "vlab/modular.hpp"

using namespace vlab;
using namespace vlab::testing;

namespace {

const char* kStep = "piecewise(x >= 2 and x <= 3 : 3, else : 2)";

// Recomputes both sides of a cube witness from its stored sets alone.
void reverify(const Witness& w, const ExponentField& p, const ExponentField& q) {
  const DomainPtr dom = p.function().domain_ptr();
  std::vector<double> chi(dom->cell_count(), 0.0);
  for (std::size_t c : w.e_alpha->cells()) chi[static_cast<std::size_t>(dom->slot(c))] = 1.0;
  for (std::size_t c : w.e_alpha->cells()) CHECK(q.at_box(c) <= w.alpha);
  for (std::size_t c : w.e_beta->cells()) CHECK(p.at_box(c) >= w.beta);
  CHECK(w.q_minus_q < w.alpha);
  CHECK(w.alpha < w.beta);
  CHECK(w.beta < w.p_plus_q);
  for (const TrajectoryPoint& t : w.trajectory) {
    const GridFunction f = GridFunction(dom, chi).scaled(t.lambda);
    const double lhs = modular(maximal_oracle(f).mf, p).value;
    const double rhs = w.c1 * modular(f, q).value + w.c2;
    CHECK(lhs == doctest::Approx(t.lhs).epsilon(1e-12));
    CHECK(rhs == doctest::Approx(t.rhs).epsilon(1e-12));
    if (t.lambda * w.measure_e_alpha / w.measure_cube >= 1) CHECK(lhs >= t.lhs_bound * (1 - 1e-12));
    CHECK(rhs <= t.rhs_bound * (1 + 1e-12));
  }
}

}  // namespace

TEST_CASE("random step families are deterministic") {
  const auto d = interval(0, 10, 0.1);
  const auto a = random_step_functions(d, {20, 4});
  const auto b = random_step_functions(d, {20, 4});
  const auto c = random_step_functions(d, {20, 5});
  REQUIRE(a.size() == 20);
  bool differs = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(std::equal(a[i].values().begin(), a[i].values().end(), b[i].values().begin()));
    differs = differs || !std::equal(a[i].values().begin(), a[i].values().end(), c[i].values().begin());
  }
  CHECK(differs);
}

TEST_CASE("falsifier finds the step-exponent counterexample") {
  const auto d = interval(0, 3, 0.01);
  const ExponentField p = exponent(kStep, d);
  const Witness w = falsify(p, p);
  REQUIRE(w.status == Witness::Status::witness);
  const auto& last = w.trajectory.back();
  CHECK(last.lhs > 1e3 * last.rhs);
  CHECK(last.lambda <= std::ldexp(1.0, 20));
  CHECK(w.e_alpha->measure() > 0);
  for (std::size_t c : w.e_alpha->cells()) CHECK(d->center(c)[0] < 2);
  for (std::size_t c : w.e_beta->cells()) CHECK(d->center(c)[0] > 2);
  reverify(w, p, p);
}

TEST_CASE("falsifier soundness on random 2D pairs") {
  std::mt19937_64 rng(21);
  const auto d = share(make_box({0, 0}, {5, 4}, 1));
  int found = 0;
  for (int t = 0; t < 6; ++t) {
    const ExponentField p(random_field(d, rng, 1.2, 4, true)), q(random_field(d, rng, 1.2, 4, true));
    FalsifyOptions opts;
    opts.budget = 8;
    const Witness w = falsify(p, q, opts);
    if (w.status == Witness::Status::none) continue;
    ++found;
    reverify(w, p, q);
  }
  CHECK(found > 0);
}

TEST_CASE("falsifier reports none when every cube is fine") {
  const auto d = interval(0, 3, 0.05);
  const ExponentField two = exponent("2", d);
  CHECK(falsify(two, two).status == Witness::Status::none);
  CHECK(falsify(two, exponent("3 + x", d)).status == Witness::Status::none);
}

TEST_CASE("tail falsifier on a truncated half-line") {
  const auto d = interval(-256, 256, 1);
  const auto s = TruncationSchedule::geometric(2, 7);
  const Witness w = falsify_tail(exponent("2", d), exponent("piecewise(x >= 0 and x <= 1 : 2, else : 3)", d), s);
  CHECK(w.mode == "tail");
  CHECK(w.status != Witness::Status::none);
  REQUIRE(w.trajectory.size() >= 3);
  CHECK(w.trajectory.back().lhs / w.trajectory.back().rhs > w.trajectory.front().lhs / w.trajectory.front().rhs);
}

TEST_CASE("constants validate on bounded domains") {
  const auto d = interval(0, 1, 0.02);
  const ExponentField two = exponent("2", d);
  ConstantsOptions opts;
  opts.calibration.count = 40;
  opts.holdout.count = 20;
  const InequalityReport r = estimate_constants(two, two, MaximalOperator{}, opts);
  CHECK(r.status == "validated");
  CHECK(r.mode == "bounded");
  CHECK(r.c1 == 2 * r.c_hat);
  CHECK(r.c2 == doctest::Approx((2 * r.c_hat + 1) * 1.0));
  CHECK(r.decomposition_exact);
  for (const auto& m : r.holdout) CHECK(m.pass);

  const InequalityReport c = estimate_constants(exponent("1.5", d), exponent("2.5", d), MaximalOperator{}, opts);
  CHECK(c.status == "validated");

  const auto step = interval(0, 3, 0.05);
  const ExponentField sp = exponent(kStep, step);
  CHECK(estimate_constants(sp, sp, MaximalOperator{}, opts).status == "refused");
  CHECK(estimate_constants(exponent("1", d), exponent("1", d), MaximalOperator{}, opts).status == "refused");
}

TEST_CASE("constants with an omega certificate") {
  const auto d = interval(-64, 64, 0.25);
  const auto s = TruncationSchedule::geometric(2, 5);
  const ExponentField p = exponent("2", d), q = exponent("2 + chi(-1, 1)", d);
  const OmegaCertificate cert = construct_omega(p, q, 2.0, s);
  REQUIRE(cert.issued);
  ConstantsOptions opts;
  opts.calibration.count = 20;
  opts.holdout.count = 20;
  const InequalityReport r = estimate_constants(p, q, MaximalOperator{}, opts, &cert);
  CHECK(r.mode == "certificate");
  CHECK(r.status == "validated");
  CHECK(r.c1 == doctest::Approx(r.safety * r.c_hat * (1 + r.sup_p) * (1 + r.sup_q)));
  CHECK(r.decomposition_exact);
}

TEST_CASE("log-Hoelder diagnostics") {
  const auto d = interval(-10, 10, 0.1);
  const ExponentField p = exponent("3 - 1/(1+x^2)", d);
  const LogHolderDiagnostic g = log_holder_diagnostic(p);
  CHECK(g.p_inf == doctest::Approx(3 - 1 / (1 + 9.95 * 9.95)));
  CHECK(g.c0 > 0);
  CHECK(g.c0 < 1);
  CHECK(g.c_inf > 0);
  CHECK(log_holder_diagnostic(exponent("2", d)).c0 == 0);
  const auto refined = log_holder_refinement(*parse("3 - 1/(1+x^2)"), -10, 10, {0.1, 0.05});
  REQUIRE(refined.size() == 2);
  CHECK(std::fabs(refined[1].c0 - refined[0].c0) < 0.1 * refined[0].c0);
}

TEST_CASE("modular inequality for log-Hoelder exponents on the unit ball") {
  const auto d = interval(-10, 10, 0.1);
  const ExponentField p = exponent("3 - 1/(1+x^2)", d);
  auto family = random_step_functions(d, {30, 3});
  for (auto& f : family) f = f.scaled(1 / luxemburg_norm(f, p));
  const LogCheckReport r = modular_log_check(p, family);
  CHECK(r.all_in_unit_ball);
  CHECK(r.ratios.size() == 30);
  CHECK(r.c_star >= 1);
  CHECK(r.tail_integral > 0);
}

TEST_CASE("fourier check gates") {
  const auto d = interval(-8, 8, 0.25);
  ConstantsOptions opts;
  opts.calibration.count = 20;
  opts.holdout.count = 20;
  const ExponentField two = exponent("2", d);
  const FourierCheckReport ok = fourier_check(two, two, std::nullopt, opts);
  CHECK(ok.status == "validated");
  CHECK(ok.constants.max_identity_deviation <= 1e-9);
  CHECK(fourier_check(exponent("3", d), exponent("3", d), std::nullopt, opts).status == "refused");
  CHECK(fourier_check(two, exponent("1.5", d), std::nullopt, opts).status == "refused");
  const auto masked = share(tail_restrict(*d, 1));
  const ExponentField mp = exponent("2", masked);
  CHECK(fourier_check(mp, mp, std::nullopt, opts).status == "refused");
}

TEST_CASE("worked examples are reproducible") {
  for (const std::string id : {"ex-1.2", "ex-1.9a", "ex-1.9b", "ex-1.9c", "rmk-1.8a"}) {
    CAPTURE(id);
    const ExampleReport a = reproduce_example(id);
    const ExampleReport b = reproduce_example(id);
    CHECK(a.csv_rows == b.csv_rows);
    CHECK(a.exit_code == b.exit_code);
  }
  CHECK(reproduce_example("ex-1.2").exit_code == 1);
  CHECK(reproduce_example("ex-1.9a").exit_code == 0);
  CHECK(reproduce_example("ex-1.9b").exit_code == 1);
  CHECK_THROWS_AS(reproduce_example("nope"), std::invalid_argument);
}
