#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "vlab/experiments.hpp"
#include "vlab/modular.hpp"

namespace vlab {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

ExponentField exponent(const std::string& src, const DomainPtr& dom) {
  return sample_exponent(*parse(src), dom);
}

GridFunction function(const std::string& src, const DomainPtr& dom) { return sample(*parse(src), dom); }

void add_touching_rows(ExampleReport& r, const ConditionReport& t) {
  r.csv_header = {"R", "p_plus", "q_minus", "gap"};
  for (const auto& row : t.evidence.rows) r.csv_rows.push_back({row[0], row[1], row[2], row[3]});
}

// Example with p = 2 on [0,1], 3 on [2,3]: f_k = k chi_[0,1].
ExampleReport ex_1_2() {
  ExampleReport r;
  r.title = "step exponent 2 on [0,1], 3 on [2,3]: modular inequality fails";
  auto dom = share(make_interval(0, 3, 0.01));
  const std::string pexpr = "piecewise(x >= 2 and x <= 3 : 3, else : 2)";
  const ExponentField p = exponent(pexpr, dom), q = exponent(pexpr, dom);
  r.csv_header = {"k", "rho_f", "rho_Mf", "k3_over_27", "ratio"};
  for (double k : {9.0, 27.0, 81.0}) {
    const GridFunction f = function(fmt(k) + " * chi(0, 1)", dom);
    const double rf = modular(f, p).value;
    const double rm = modular(maximal_fast(f).mf, p).value;
    r.csv_rows.push_back({k, rf, rm, k * k * k / 27, rm / rf});
  }
  r.conditions.push_back(check_finite_measure(p, q));
  r.conditions.push_back(check_lerner(p));
  const Witness w = falsify(p, q);
  r.facts.emplace_back("falsify", status_name(w.status));
  r.facts.emplace_back("cube", "[" + fmt(dom->center(w.cube.start[0])[0] - 0.005) + ", " +
                                   fmt(dom->center(w.cube.start[0] + w.cube.size - 1)[0] + 0.005) + "]");
  r.facts.emplace_back("alpha", fmt(w.alpha));
  r.facts.emplace_back("beta", fmt(w.beta));
  if (!w.trajectory.empty()) {
    const auto& t = w.trajectory.back();
    r.facts.emplace_back("witness_lambda", fmt(t.lambda));
    r.facts.emplace_back("witness_ratio", fmt(t.lhs / t.rhs));
  }
  r.exit_code = w.status == Witness::Status::witness ? 1 : 2;
  return r;
}

// p = const on an unbounded set, q = p on a cube and larger elsewhere.
ExampleReport ex_1_6() {
  ExampleReport r;
  r.title = "p_+ = q_- on an infinite-measure set is not enough";
  auto dom = share(make_interval(-1024, 1024, 1.0));
  const ExponentField p = exponent("2", dom);
  const ExponentField q = exponent("piecewise(x >= 0 and x <= 1 : 2, else : 3)", dom);
  const auto schedule = TruncationSchedule::geometric(2, 9);
  r.conditions.push_back(check_finite_measure(p, q));
  const ConditionReport touching = check_touching(p, q, schedule);
  r.conditions.push_back(touching);
  const Witness w = falsify_tail(p, q, schedule);
  r.csv_header = {"R", "lambda", "lhs", "rhs", "ratio"};
  for (const auto& t : w.trajectory) r.csv_rows.push_back({t.radius, t.lambda, t.lhs, t.rhs, t.lhs / t.rhs});
  r.facts.emplace_back("tail_falsify", status_name(w.status));
  for (const auto& n : w.notes) r.notes.push_back(n);
  r.exit_code = touching.verdict == Verdict::fails ? 1 : 2;
  return r;
}

ExampleReport touching_example(const std::string& title, const std::string& pexpr, const std::string& qexpr) {
  ExampleReport r;
  r.title = title;
  auto dom = share(make_interval(-4096, 4096, 0.05));
  const ExponentField p = exponent(pexpr, dom), q = exponent(qexpr, dom);
  const auto schedule = TruncationSchedule::geometric(1, 12);
  const ConditionReport t = check_touching(p, q, schedule);
  add_touching_rows(r, t);
  r.conditions.push_back(t);
  r.exit_code = t.verdict == Verdict::holds ? 0 : t.verdict == Verdict::fails ? 1 : 2;
  return r;
}

ExampleReport ex_1_9c() {
  ExampleReport r = touching_example("p = 2, q = 2 + chi_[-1,1] touch at infinity", "2", "2 + chi(-1, 1)");
  auto dom = share(make_interval(-4096, 4096, 0.05));
  const ExponentField p = exponent("2", dom), q = exponent("2 + chi(-1, 1)", dom);
  const auto schedule = TruncationSchedule::geometric(1, 12);
  OmegaOptions pinned;
  pinned.kappa_candidates = {3.0};
  const OmegaCertificate cert = construct_omega(p, q, 2.0, schedule, pinned);
  r.facts.emplace_back("omega_kappa", fmt(cert.kappa));
  if (cert.omega) r.facts.emplace_back("omega_value", fmt(cert.omega->values().front()));
  r.facts.emplace_back("omega_modular", fmt(cert.partial_modulars.empty() ? 0 : cert.partial_modulars.back()));
  r.facts.emplace_back("omega_verdict", verdict_name(cert.report.verdict));
  const OmegaCertificate smallest = construct_omega(p, q, 2.0, schedule);
  r.facts.emplace_back("omega_default_kappa", fmt(smallest.kappa));
  return r;
}

ExampleReport rmk_1_8a() {
  ExampleReport r;
  r.title = "1/p = 1/2 - 1/x^2, 1/q = 1/p - 1/x^4 on (2, inf): embedding without touching";
  auto dom = share(make_interval(2, 4098, 0.02));
  const ExponentField p = exponent("1/(1/2 - 1/x^2)", dom);
  const ExponentField q = exponent("1/(1/2 - 1/x^2 - 1/x^4)", dom);
  const auto schedule = TruncationSchedule::geometric(4, 10);
  const ConditionReport touching = check_touching(p, q, schedule);
  const ConditionReport embedding = check_embedding(p, q, schedule);
  add_touching_rows(r, touching);
  r.csv_header.push_back("defect_integral[lambda=1.5]");
  for (std::size_t k = 0; k < r.csv_rows.size(); ++k) r.csv_rows[k].push_back(embedding.evidence.rows[k][1]);
  r.conditions.push_back(touching);
  r.conditions.push_back(embedding);
  const DefectField rf = defect_exponent(p, q);
  for (double x : {3.01, 10.01, 50.01}) {
    const auto c = static_cast<std::size_t>(std::floor((x - 2) / 0.02));
    r.facts.emplace_back("r(" + fmt(dom->center(c)[0]) + ")", fmt(rf.r->at_box(c)));
    r.facts.emplace_back("x^4(" + fmt(dom->center(c)[0]) + ")", fmt(std::pow(dom->center(c)[0], 4)));
  }
  r.exit_code = touching.verdict == Verdict::fails ? 1 : 2;
  return r;
}

ExampleReport rmk_1_8b() {
  ExampleReport r;
  r.title = "p = 2, q = 2 loglog x / (loglog x - 2) on (e^9, inf): touching without embedding";
  const double a = std::exp(9.0);
  auto dom = share(make_interval(a, 8192 * a, 162));
  const ExponentField p = exponent("2", dom);
  const ExponentField q = exponent("2*loglog(x)/(loglog(x)-2)", dom);
  const auto schedule = TruncationSchedule::geometric(2 * a, 12);
  const ConditionReport touching = check_touching(p, q, schedule, {2.0, 1.0, 0.5});
  add_touching_rows(r, touching);
  r.conditions.push_back(touching);
  const DefectField rf = defect_exponent(p, q);
  for (double lambda : {1.5, 2.0, 4.0}) {
    const ConditionReport di = defect_integral_estimate(rf, lambda, schedule);
    r.csv_header.push_back("defect_integral[lambda=" + fmt(lambda) + "]");
    for (std::size_t k = 0; k < r.csv_rows.size(); ++k) r.csv_rows[k].push_back(di.evidence.rows[k][1]);
    r.conditions.push_back(di);
  }
  r.conditions.push_back(check_embedding(p, q, schedule));
  OmegaOptions opts;
  opts.touching_eps = {2.0, 1.0, 0.5};
  const OmegaCertificate cert = construct_omega(p, q, 2.0, schedule, opts);
  r.facts.emplace_back("omega_issued", cert.issued ? "true" : "false");
  if (!cert.issued) r.facts.emplace_back("omega_reason", cert.reason);
  r.exit_code = 1;
  return r;
}

ExampleReport thm_1_5() {
  ExampleReport r;
  r.title = "modular inequality with an error term for a log-Hoelder exponent";
  r.csv_header = {"h", "c_star", "tail_integral", "c0", "c_inf"};
  const std::string pexpr = "3 - 1/(1+x^2)";
  FamilyOptions fam{50, 5};
  double c_prev = 0;
  for (double h : {0.1, 0.05}) {
    auto dom = share(make_interval(-10, 10, h));
    // The same step functions at both resolutions: sample the coarse family
    // by coordinate.
    auto coarse = share(make_interval(-10, 10, 0.1));
    const auto base = random_step_functions(coarse, fam);
    std::vector<GridFunction> family;
    for (const auto& g : base) {
      std::vector<double> v;
      for (std::size_t c : dom->cells()) {
        const double x = dom->center(c)[0];
        const auto i = static_cast<std::size_t>(std::floor((x + 10) / 0.1));
        v.push_back(g.at_box(std::min<std::size_t>(i, coarse->nx() - 1)));
      }
      family.emplace_back(dom, std::move(v));
    }
    const LogCheckReport lc = modular_log_check(exponent(pexpr, dom), family);
    r.csv_rows.push_back({h, lc.c_star, lc.tail_integral, lc.diagnostic.c0, lc.diagnostic.c_inf});
    if (c_prev > 0) r.facts.emplace_back("refinement_change", fmt(std::fabs(lc.c_star - c_prev) / c_prev));
    c_prev = lc.c_star;
  }
  // The step exponent with ||f_k|| <= 1 enforced: finite ratios, no contradiction.
  auto dom = share(make_interval(0, 3, 0.01));
  const ExponentField p = exponent("piecewise(x >= 2 and x <= 3 : 3, else : 2)", dom);
  std::vector<GridFunction> fk;
  for (int k : {9, 27, 81}) fk.push_back(function(std::to_string(k) + " * chi(0, 1)", dom));
  const LogCheckReport step = modular_log_check(p, fk);
  r.facts.emplace_back("step_exponent_c_star", fmt(step.c_star));
  r.facts.emplace_back("step_exponent_unit_ball", step.all_in_unit_ball ? "true" : "false");
  r.exit_code = 0;
  return r;
}

ExampleReport cor_1_12() {
  ExampleReport r;
  r.title = "Fourier modulus: p = 2, q = 2 + chi_[-1,1]";
  auto dom = share(make_interval(-64, 64, 0.125));
  const ExponentField p = exponent("2", dom), q = exponent("2 + chi(-1, 1)", dom);
  const auto schedule = TruncationSchedule::geometric(2, 5);
  const FourierCheckReport fc = fourier_check(p, q, schedule);
  const FourierCheckReport plain = fourier_check(p, p, std::nullopt);
  r.csv_header = {"case", "c_hat", "c1", "c2", "holdout_passed", "holdout_size"};
  auto passed = [](const InequalityReport& ir) {
    double n = 0;
    for (const auto& m : ir.holdout) n += m.pass ? 1 : 0;
    return n;
  };
  r.csv_rows.push_back({1, fc.constants.c_hat, fc.constants.c1, fc.constants.c2, passed(fc.constants),
                        static_cast<double>(fc.constants.holdout.size())});
  r.csv_rows.push_back({2, plain.constants.c_hat, plain.constants.c1, plain.constants.c2,
                        passed(plain.constants), static_cast<double>(plain.constants.holdout.size())});
  r.facts.emplace_back("certificate_status", fc.status);
  r.facts.emplace_back("plancherel_status", plain.status);
  r.facts.emplace_back("plancherel_max_deviation", fmt(plain.constants.max_identity_deviation));
  r.notes.push_back("case 1: p = 2, q = 2 + chi_[-1,1] with an omega certificate; case 2: p = q = 2");
  r.exit_code = fc.status == "validated" && plain.status == "validated" ? 0 : 1;
  return r;
}

}  // namespace

const std::vector<std::string>& example_ids() {
  static const std::vector<std::string> ids = {"ex-1.2",   "ex-1.6",   "ex-1.9a", "ex-1.9b", "ex-1.9c",
                                               "rmk-1.8a", "rmk-1.8b", "thm-1.5", "cor-1.12"};
  return ids;
}

ExampleReport reproduce_example(const std::string& id) {
  ExampleReport r;
  if (id == "ex-1.2")
    r = ex_1_2();
  else if (id == "ex-1.6")
    r = ex_1_6();
  else if (id == "ex-1.9a")
    r = touching_example("p = 2 - 1/(1+x^2), q = 2 + 1/(1+x^2) touch at infinity", "2 - 1/(1+x^2)",
                         "2 + 1/(1+x^2)");
  else if (id == "ex-1.9b")
    r = touching_example("p = 2 - 1/(1+x^2), q = 3 + 1/(1+x^2) do not touch", "2 - 1/(1+x^2)",
                         "3 + 1/(1+x^2)");
  else if (id == "ex-1.9c")
    r = ex_1_9c();
  else if (id == "rmk-1.8a")
    r = rmk_1_8a();
  else if (id == "rmk-1.8b")
    r = rmk_1_8b();
  else if (id == "thm-1.5")
    r = thm_1_5();
  else if (id == "cor-1.12")
    r = cor_1_12();
  else
    throw std::invalid_argument("unknown example id '" + id + "'");
  r.id = id;
  return r;
}

}  // namespace vlab
