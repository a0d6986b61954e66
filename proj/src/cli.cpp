#include "vlab/cli.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <utility>

#include "CLI11.hpp"
#include "vlab/config.hpp"
#include "vlab/report.hpp"
#include "vlab/simd.hpp"

#ifndef VLAB_GOLDEN_DIR
#define VLAB_GOLDEN_DIR "tests/golden"
#endif

namespace vlab::cli {

namespace {

// Config access that records every value actually used, defaults included,
// so each report carries the resolved configuration.
class Resolved {
 public:
  explicit Resolved(const Config* cfg) : cfg_(cfg) {}

  bool has(const std::string& s, const std::string& k) const { return cfg_ && cfg_->has(s, k); }
  bool has_section(const std::string& s) const {
    if (!cfg_) return false;
    for (const auto& e : cfg_->entries())
      if (e.section == s) return true;
    return false;
  }

  double num(const std::string& s, const std::string& k) {
    if (!has(s, k)) missing(s, k);
    return record(s, k, cfg_->number(s, k));
  }
  double num(const std::string& s, const std::string& k, double fallback) {
    return record(s, k, has(s, k) ? cfg_->number(s, k) : fallback);
  }
  std::vector<double> nums(const std::string& s, const std::string& k, std::vector<double> fallback) {
    const auto v = has(s, k) ? cfg_->numbers(s, k) : fallback;
    Json a = Json::array();
    for (double x : v) a.push_back(number_json(x));
    resolved_[s][k] = a;
    return v;
  }
  std::string text(const std::string& s, const std::string& k, const std::string& fallback) {
    const std::string v = has(s, k) ? cfg_->text(s, k) : fallback;
    resolved_[s][k] = v;
    return v;
  }
  std::size_t count(const std::string& s, const std::string& k, std::size_t fallback) {
    const double v = num(s, k, static_cast<double>(fallback));
    if (!(v >= 0) || v != std::floor(v) || v > 1e12) fail(s, k, "expected a non-negative integer");
    return static_cast<std::size_t>(v);
  }

  // Parses an expression value; syntax errors point at the config column.
  ExprPtr expr(const std::string& s, const std::string& k) {
    if (!has(s, k)) missing(s, k);
    const Config::Entry* e = cfg_->find(s, k);
    try {
      ExprPtr p = parse(e->value);
      resolved_[s][k] = print(*p);
      return p;
    } catch (const ParseError& err) {
      cfg_->fail(*e, err.offset(), "in expression '" + k + "': expected " + err.expected() +
                                       " (offset " + std::to_string(err.offset()) + ")");
    }
  }

  [[noreturn]] void fail(const std::string& s, const std::string& k, const std::string& what) const {
    const Config::Entry* e = cfg_ ? cfg_->find(s, k) : nullptr;
    if (e) cfg_->fail(*e, 1, what);
    throw ConfigError(cfg_ ? cfg_->source() : "<args>", 0, 0, "[" + s + "] " + k + ": " + what);
  }
  [[noreturn]] void missing(const std::string& s, const std::string& k) const {
    throw ConfigError(cfg_ ? cfg_->source() : "<args>", 0, 0,
                      "missing key '" + k + "' in section [" + s + "]");
  }

  Json json() const {
    Json j;
    j["source"] = cfg_ ? Json(cfg_->source()) : Json(nullptr);
    j["resolved"] = resolved_;
    return j;
  }

 private:
  double record(const std::string& s, const std::string& k, double v) {
    resolved_[s][k] = number_json(v);
    return v;
  }

  const Config* cfg_;
  Json resolved_ = Json::object();
};

struct Problem {
  DomainPtr domain;
  std::optional<ExponentField> p, q;
  std::optional<GridFunction> f;
  std::optional<TruncationSchedule> schedule;
};

DomainPtr read_domain(Resolved& r) {
  const int dim = static_cast<int>(r.num("domain", "dim", 1));
  const double h = r.num("domain", "h");
  if (dim == 1) return share(make_interval(r.num("domain", "lo"), r.num("domain", "hi"), h));
  if (dim != 2) r.fail("domain", "dim", "dimension must be 1 or 2");
  const auto lo = r.nums("domain", "lo", {});
  const auto hi = r.nums("domain", "hi", {});
  if (lo.size() != 2) r.fail("domain", "lo", "2D domains need 'lo = x, y'");
  if (hi.size() != 2) r.fail("domain", "hi", "2D domains need 'hi = x, y'");
  return share(make_box({lo[0], lo[1]}, {hi[0], hi[1]}, h));
}

std::optional<TruncationSchedule> read_schedule(Resolved& r) {
  if (!r.has_section("schedule")) return std::nullopt;
  TruncationSchedule s;
  if (r.has("schedule", "radii")) {
    s.radii = r.nums("schedule", "radii", {});
  } else {
    const double k = r.num("schedule", "k_max", 12);
    if (k != std::floor(k)) r.fail("schedule", "k_max", "expected an integer");
    s = TruncationSchedule::geometric(r.num("schedule", "r0"), static_cast<int>(k));
  }
  try {
    s.validate();
  } catch (const GridError& e) {
    r.fail("schedule", r.has("schedule", "radii") ? "radii" : "r0", e.what());
  }
  return s;
}

Problem read_problem(Resolved& r, bool need_p, bool need_q, bool need_f) {
  Problem pr;
  pr.domain = read_domain(r);
  if (need_p) pr.p.emplace(sample_exponent(*r.expr("exponents", "p"), pr.domain));
  if (need_q) pr.q.emplace(sample_exponent(*r.expr("exponents", "q"), pr.domain));
  if (need_f) pr.f.emplace(sample(*r.expr("function", "f"), pr.domain));
  pr.schedule = read_schedule(r);
  return pr;
}

int combine(const std::vector<Verdict>& vs) {
  bool all = true;
  for (Verdict v : vs) {
    if (v == Verdict::fails) return kFails;
    if (v != Verdict::holds) all = false;
  }
  return all ? kOk : kInconclusive;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

struct Output {
  bool csv = false;
  std::ostream* out;
  // Emits the report; CSV mode prints the series instead of the JSON.
  void emit(const Json& report, const std::string& series) const {
    if (csv)
      *out << series;
    else
      *out << dump(report);
  }
};

Json header(const std::string& command, const Resolved& r) {
  Json j;
  j["command"] = command;
  j["config"] = r.json();
  return j;
}

std::string csv_target(Resolved& r) { return r.text("output", "csv", ""); }

// ---------------------------------------------------------------------------

int cmd_modular(Resolved& r, const Output& o) {
  const Problem pr = read_problem(r, true, false, true);
  const std::string target = csv_target(r);
  Json j = header("modular", r);
  j["result"] = to_json(modular(*pr.f, *pr.p));
  std::vector<std::vector<double>> rows;
  if (pr.schedule) {
    const auto parts = partial_modulars(*pr.f, *pr.p, *pr.domain, *pr.schedule);
    Json a = Json::array();
    for (std::size_t k = 0; k < parts.size(); ++k) {
      Json row = to_json(parts[k]);
      row["radius"] = pr.schedule->radii[k];
      a.push_back(row);
      rows.push_back({pr.schedule->radii[k], parts[k].value});
    }
    j["partial"] = a;
  }
  const std::string series = format_csv({"radius", "rho"}, rows);
  if (!target.empty()) write_file(target, series);
  o.emit(j, series);
  return j["result"]["overflow"].get<bool>() ? kInconclusive : kOk;
}

int cmd_norm(Resolved& r, const Output& o) {
  const Problem pr = read_problem(r, true, false, true);
  const double rtol = r.num("norm", "rtol", 1e-9);
  const double n = luxemburg_norm(*pr.f, *pr.p, rtol);
  Json j = header("norm", r);
  j["result"] = {{"norm", number_json(n)}, {"rtol", rtol}, {"h", pr.domain->h()},
                 {"measure", pr.domain->measure()}};
  if (n > 0) j["result"]["modular_at_norm"] = to_json(modular(pr.f->scaled(1.0 / n), *pr.p));
  o.emit(j, format_csv({"norm"}, {{n}}));
  return kOk;
}

int cmd_maxop(Resolved& r, const Output& o) {
  const Problem pr = read_problem(r, false, false, true);
  const bool verify = r.num("maxop", "verify", 0) != 0;
  const std::string target = csv_target(r);
  const MaxOpResult res = maximal_fast(*pr.f);
  const auto& dom = *pr.domain;
  const bool two = dom.dim() == 2;
  std::vector<std::string> cols = two ? std::vector<std::string>{"x", "y", "f", "Mf", "window_x", "window_y",
                                                                 "window_side"}
                                      : std::vector<std::string>{"x", "f", "Mf", "window_lo", "window_length"};
  std::vector<std::vector<double>> rows;
  const auto cells = dom.cells();
  double peak = 0;
  for (std::size_t k = 0; k < cells.size(); ++k) {
    const auto c = dom.center(cells[k]);
    const Window& w = res.windows[k];
    const double wx = dom.origin()[0] + static_cast<double>(w.start[0]) * dom.h();
    const double side = static_cast<double>(w.size) * dom.h();
    peak = std::max(peak, res.mf[k]);
    if (two)
      rows.push_back({c[0], c[1], (*pr.f)[k], res.mf[k], wx,
                      dom.origin()[1] + static_cast<double>(w.start[1]) * dom.h(), side});
    else
      rows.push_back({c[0], (*pr.f)[k], res.mf[k], wx, side});
  }
  const std::string series = format_csv(cols, rows);
  if (!target.empty()) write_file(target, series);
  Json j = header("maxop", r);
  j["result"] = {{"cells", cells.size()}, {"max_mf", peak}, {"backend", simd::backend_name(simd::active_backend())}};
  int code = kOk;
  if (verify) {
    const MaxOpResult ref = maximal_oracle(*pr.f);
    const auto a = res.mf.values(), b = ref.mf.values();
    const bool same = std::equal(a.begin(), a.end(), b.begin(), b.end()) && res.windows == ref.windows;
    j["result"]["oracle_equal"] = same;
    if (!same) code = kFails;
  }
  o.emit(j, series);
  return code;
}

int cmd_check(Resolved& r, const Output& o) {
  const Problem pr = read_problem(r, true, true, false);
  std::string list = r.text("check", "conditions", pr.schedule ? "touching, embedding" : "finite_measure");
  const auto eps = r.nums("check", "eps", {1.0, 0.5, 0.25});
  const auto lambdas = r.nums("check", "lambdas", {1.5, 2.0, 4.0, 8.0});
  std::vector<std::string> names;
  {
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item.erase(0, item.find_first_not_of(" \t"));
      item.erase(item.find_last_not_of(" \t") + 1);
      if (!item.empty()) names.push_back(item);
    }
  }
  auto need_schedule = [&](const std::string& n) {
    if (!pr.schedule) r.fail("check", "conditions", "condition '" + n + "' needs a [schedule] section");
  };
  Json j = header("check", r);
  Json reports = Json::array();
  std::vector<Verdict> verdicts;
  std::vector<std::vector<double>> rows;
  std::vector<std::string> cols;
  auto add = [&](const ConditionReport& rep) {
    reports.push_back(to_json(rep));
    verdicts.push_back(rep.verdict);
    if (cols.empty() && !rep.evidence.columns.empty()) {
      cols = rep.evidence.columns;
      rows = rep.evidence.rows;
    }
  };
  for (const auto& n : names) {
    if (n == "finite_measure") {
      add(check_finite_measure(*pr.p, *pr.q));
    } else if (n == "touching") {
      need_schedule(n);
      add(check_touching(*pr.p, *pr.q, *pr.schedule, eps));
    } else if (n == "embedding") {
      need_schedule(n);
      add(check_embedding(*pr.p, *pr.q, *pr.schedule, lambdas));
    } else if (n == "defect_integral") {
      need_schedule(n);
      const DefectField rf = defect_exponent(*pr.p, *pr.q);
      for (double l : lambdas) {
        // The integral's divergence is evidence, not a failed condition.
        ConditionReport rep = defect_integral_estimate(rf, l, *pr.schedule);
        reports.push_back(to_json(rep));
      }
    } else if (n == "lerner") {
      add(check_lerner(*pr.p));
    } else if (n == "cubes") {
      ConditionReport rep;
      rep.condition = "cubes";
      rep.verdict = all_cubes_satisfy(*pr.p, *pr.q) ? Verdict::holds : Verdict::fails;
      add(rep);
    } else {
      r.fail("check", "conditions", "unknown condition '" + n + "'");
    }
  }
  j["reports"] = reports;
  const int code = combine(verdicts);
  j["exit_code"] = code;
  const std::string series = format_csv(cols, rows);
  const std::string target = csv_target(r);
  if (!target.empty()) write_file(target, series);
  o.emit(j, series);
  return code;
}

OmegaOptions read_omega_options(Resolved& r, const std::vector<double>& default_eps) {
  OmegaOptions opts;
  opts.kappa_candidates = r.nums("omega", "kappa", {});
  opts.touching_eps = r.nums("omega", "eps", default_eps);
  return opts;
}

int cmd_omega(Resolved& r, const Output& o) {
  const Problem pr = read_problem(r, true, true, false);
  if (!pr.schedule) r.missing("schedule", "r0");
  const double lambda = r.num("omega", "lambda", 2.0);
  const OmegaOptions opts = read_omega_options(r, {1.0, 0.5, 0.25});
  const OmegaCertificate cert = construct_omega(*pr.p, *pr.q, lambda, *pr.schedule, opts);
  Json j = header("omega", r);
  j["certificate"] = to_json(cert);
  int code = kInconclusive;
  if (cert.issued && cert.report.verdict == Verdict::holds) code = kOk;
  if (!cert.issued && cert.reason.find("do not touch") != std::string::npos) code = kFails;
  j["exit_code"] = code;
  const std::string series = format_csv(cert.report.evidence.columns, cert.report.evidence.rows);
  const std::string target = csv_target(r);
  if (!target.empty()) write_file(target, series);
  o.emit(j, series);
  return code;
}

int cmd_falsify(Resolved& r, const Output& o) {
  const Problem pr = read_problem(r, true, true, false);
  FalsifyOptions opts;
  opts.budget = static_cast<int>(r.count("falsify", "budget", 20));
  opts.threshold = r.num("falsify", "threshold", 1e3);
  opts.c1 = r.num("falsify", "c1", 1.0);
  opts.c2 = r.num("falsify", "c2", 1.0);
  const std::string mode = r.text("falsify", "mode", "cube");
  Witness w;
  if (mode == "cube") {
    w = falsify(*pr.p, *pr.q, opts);
  } else if (mode == "tail") {
    opts.tail_eps = r.num("falsify", "tail_eps", 0.5);
    if (!pr.schedule) r.missing("schedule", "r0");
    w = falsify_tail(*pr.p, *pr.q, *pr.schedule, opts);
  } else {
    r.fail("falsify", "mode", "expected 'cube' or 'tail'");
  }
  Json j = header("falsify", r);
  j["witness"] = to_json(w);
  std::vector<std::vector<double>> rows;
  for (const auto& t : w.trajectory) rows.push_back({t.radius, t.lambda, t.lhs, t.rhs, t.lhs_bound, t.rhs_bound});
  const std::string series = format_csv({"radius", "lambda", "lhs", "rhs", "lhs_bound", "rhs_bound"}, rows);
  const std::string target = csv_target(r);
  if (!target.empty()) write_file(target, series);
  o.emit(j, series);
  switch (w.status) {
    case Witness::Status::witness: return kFails;
    case Witness::Status::none: return kOk;
    default: return kInconclusive;
  }
}

ConstantsOptions read_constants_options(Resolved& r) {
  ConstantsOptions opts;
  opts.calibration.count = r.count("constants", "calibration_count", opts.calibration.count);
  opts.calibration.seed = r.count("constants", "calibration_seed", opts.calibration.seed);
  opts.holdout.count = r.count("constants", "holdout_count", opts.holdout.count);
  opts.holdout.seed = r.count("constants", "holdout_seed", opts.holdout.seed);
  opts.safety = r.num("constants", "safety", opts.safety);
  if (!(opts.safety >= 1)) r.fail("constants", "safety", "safety factor must be >= 1");
  return opts;
}

int status_code(const std::string& status) {
  if (status == "validated") return kOk;
  if (status == "refused") return kFails;
  return kInconclusive;
}

int cmd_constants(Resolved& r, const Output& o) {
  const Problem pr = read_problem(r, true, true, false);
  const ConstantsOptions opts = read_constants_options(r);
  const std::string op = r.text("constants", "operator", "maximal");
  std::unique_ptr<Operator> t;
  if (op == "maximal") t = std::make_unique<MaximalOperator>();
  else if (op == "identity") t = std::make_unique<IdentityOperator>();
  else if (op == "fourier") t = std::make_unique<FourierModulus>();
  else r.fail("constants", "operator", "expected maximal, identity or fourier");
  Json j = header("constants", r);
  InequalityReport rep;
  std::optional<OmegaCertificate> cert;
  if (pr.schedule) {
    cert = construct_omega(*pr.p, *pr.q, r.num("omega", "lambda", 2.0), *pr.schedule,
                           read_omega_options(r, {1.0, 0.5, 0.25}));
    j["certificate"] = to_json(*cert);
    if (!cert->issued) {
      rep.status = "inconclusive";
      rep.mode = "certificate";
      rep.operator_name = t->name();
      rep.notes.push_back("no omega certificate: " + cert->reason);
    }
  }
  if (!cert || cert->issued) rep = estimate_constants(*pr.p, *pr.q, *t, opts, cert ? &*cert : nullptr);
  j["constants"] = to_json(rep);
  std::vector<std::vector<double>> rows;
  for (const auto& m : rep.holdout) rows.push_back({static_cast<double>(m.index), m.lhs, m.rhs, m.pass ? 1.0 : 0.0});
  const std::string series = format_csv({"member", "lhs", "rhs", "pass"}, rows);
  const std::string target = csv_target(r);
  if (!target.empty()) write_file(target, series);
  o.emit(j, series);
  return status_code(rep.status);
}

int cmd_fourier(Resolved& r, const Output& o) {
  const Problem pr = read_problem(r, true, true, false);
  const ConstantsOptions opts = read_constants_options(r);
  const FourierCheckReport rep = fourier_check(*pr.p, *pr.q, pr.schedule, opts);
  Json j = header("fourier", r);
  j["fourier"] = to_json(rep);
  std::vector<std::vector<double>> rows;
  for (const auto& m : rep.constants.holdout)
    rows.push_back({static_cast<double>(m.index), m.lhs, m.rhs, m.pass ? 1.0 : 0.0});
  const std::string series = format_csv({"member", "lhs", "rhs", "pass"}, rows);
  const std::string target = csv_target(r);
  if (!target.empty()) write_file(target, series);
  o.emit(j, series);
  return status_code(rep.status);
}

int cmd_bench(Resolved& r, const Output& o) {
  const int dim = static_cast<int>(r.num("bench", "dim", 1));
  const auto sizes = r.nums("bench", "sizes", dim == 1 ? std::vector<double>{64, 128, 256, 512}
                                                       : std::vector<double>{8, 16, 24, 32});
  const std::size_t repeats = std::max<std::size_t>(1, r.count("bench", "repeats", 3));
  const std::uint64_t seed = r.count("bench", "seed", 7);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<std::vector<double>> rows;
  Json table = Json::array();
  bool all_equal = true;
  for (double sz : sizes) {
    const auto n = static_cast<std::size_t>(sz);
    if (n < 1 || sz != std::floor(sz)) r.fail("bench", "sizes", "sizes must be positive integers");
    const DomainPtr d = dim == 1 ? share(make_interval(0, static_cast<double>(n), 1.0))
                                 : share(make_box({0, 0}, {double(n), double(n)}, 1.0));
    std::vector<double> v(d->cell_count());
    for (double& x : v) x = u(rng);
    const GridFunction f(d, std::move(v));
    using clock = std::chrono::steady_clock;
    double t_fast = 1e300, t_oracle = 1e300;
    std::optional<MaxOpResult> a, b;
    for (std::size_t i = 0; i < repeats; ++i) {
      auto t0 = clock::now();
      a = maximal_fast(f);
      auto t1 = clock::now();
      b = maximal_oracle(f);
      auto t2 = clock::now();
      t_fast = std::min(t_fast, std::chrono::duration<double, std::milli>(t1 - t0).count());
      t_oracle = std::min(t_oracle, std::chrono::duration<double, std::milli>(t2 - t1).count());
    }
    const auto va = a->mf.values(), vb = b->mf.values();
    const bool equal = std::equal(va.begin(), va.end(), vb.begin(), vb.end()) && a->windows == b->windows;
    all_equal = all_equal && equal;
    rows.push_back({static_cast<double>(d->cell_count()), t_fast, t_oracle, t_oracle / std::max(t_fast, 1e-9),
                    equal ? 1.0 : 0.0});
    table.push_back({{"cells", d->cell_count()}, {"fast_ms", t_fast}, {"oracle_ms", t_oracle}, {"equal", equal}});
  }
  Json j = header("bench", r);
  j["backend"] = simd::backend_name(simd::active_backend());
  j["table"] = table;
  j["notes"] = {"timings vary between runs; every other field is deterministic"};
  o.emit(j, format_csv({"cells", "fast_ms", "oracle_ms", "speedup", "equal"}, rows));
  return all_equal ? kOk : kFails;
}

int cmd_parse_check(const std::string& text, const Output& o) {
  Json j;
  j["command"] = "parse-check";
  j["input"] = text;
  try {
    const ExprPtr e = parse(text);
    j["canonical"] = print(*e);
    j["variables"] = arity(*e);
    o.emit(j, print(*e) + "\n");
    return kOk;
  } catch (const ParseError& err) {
    j["error"] = {{"offset", err.offset()}, {"expected", err.expected()}, {"excerpt", err.excerpt()}};
    *o.out << dump(j);
    return kInputError;
  }
}

std::string golden_path(const std::string& dir, const std::string& id) { return dir + "/" + id + ".csv"; }

int cmd_reproduce(const std::string& id, const std::string& golden_dir, bool update, const Output& o) {
  const ExampleReport rep = reproduce_example(id);
  const std::string csv = format_csv(rep.csv_header, rep.csv_rows);
  Json j;
  j["command"] = "reproduce";
  j["config"] = {{"source", nullptr}, {"resolved", {{"reproduce", {{"id", id}, {"golden_dir", golden_dir}}}}}};
  j["example"] = to_json(rep);
  int code = rep.exit_code;
  const std::string path = golden_path(golden_dir, id);
  if (update) {
    write_file(path, csv);
    j["golden"] = "updated";
  } else {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
      j["golden"] = "missing";
      code = kInconclusive;
    } else {
      std::ostringstream buf;
      buf << in.rdbuf();
      if (buf.str() == csv) {
        j["golden"] = "match";
      } else {
        j["golden"] = "mismatch";
        code = kInconclusive;
      }
    }
  }
  j["exit_code"] = code;
  o.emit(j, csv);
  return code;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Variable-exponent Lebesgue space toolkit", "vlab"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path, backend = "auto", golden_dir = VLAB_GOLDEN_DIR, id, text;
  bool csv = false, json = false, update = false;
  app.add_flag("--csv", csv, "print the CSV series instead of the JSON report");
  app.add_flag("--json", json, "print the JSON report (default)");
  app.add_option("--backend", backend, "kernel backend: auto, scalar or avx2")
      ->check(CLI::IsMember({"auto", "scalar", "avx2"}));

  const std::vector<std::pair<std::string, std::string>> config_cmds = {
      {"modular", "modular rho_p(f) with truncation partials"},
      {"norm", "Luxemburg norm by bisection on the modular"},
      {"maxop", "discrete maximal function and its modular"},
      {"check", "decide the exponent conditions for a pair (p, q)"},
      {"omega", "build the weight omega and its certificate"},
      {"falsify", "search for a witness against the modular inequality"},
      {"constants", "calibrate and validate an empirical operator constant"},
      {"fourier", "validate modular constants for the DFT modulus"},
      {"bench", "time the maximal operator kernels"}};
  for (const auto& [name, help] : config_cmds) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config,-c", config_path, "config file")->required(name != "bench");
  }
  auto* pc = app.add_subcommand("parse-check", "echo the canonical form of an expression");
  pc->add_option("expression", text, "expression text")->required();
  auto* rp = app.add_subcommand("reproduce", "rerun a worked example and compare with its golden CSV");
  rp->add_option("id", id, "example id")->required();
  rp->add_option("--golden-dir", golden_dir, "directory of golden CSV files");
  rp->add_flag("--update-golden", update, "rewrite the golden CSV instead of comparing");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "vlab: " << e.what() << "\n";
    return kInputError;
  }
  if (csv && json) {
    err << "vlab: --csv and --json are exclusive\n";
    return kInputError;
  }
  const Output o{csv, &out};
  try {
    if (backend == "scalar") simd::set_backend(simd::Backend::scalar);
    if (backend == "avx2") simd::set_backend(simd::Backend::avx2);
    CLI::App* sub = app.get_subcommands().front();
    const std::string name = sub->get_name();
    if (name == "parse-check") return cmd_parse_check(text, o);
    if (name == "reproduce") return cmd_reproduce(id, golden_dir, update, o);
    std::optional<Config> cfg;
    if (!config_path.empty()) cfg = Config::load(config_path);
    Resolved r(cfg ? &*cfg : nullptr);
    if (name == "modular") return cmd_modular(r, o);
    if (name == "norm") return cmd_norm(r, o);
    if (name == "maxop") return cmd_maxop(r, o);
    if (name == "check") return cmd_check(r, o);
    if (name == "omega") return cmd_omega(r, o);
    if (name == "falsify") return cmd_falsify(r, o);
    if (name == "constants") return cmd_constants(r, o);
    if (name == "fourier") return cmd_fourier(r, o);
    if (name == "bench") return cmd_bench(r, o);
  } catch (const ConfigError& e) {
    err << "vlab: config error: " << e.what() << "\n";
    return kInputError;
  } catch (const ParseError& e) {
    err << "vlab: expression error at offset " << e.offset() << ": expected " << e.expected() << "\n";
    return kInputError;
  } catch (const EvalError& e) {
    err << "vlab: evaluation error: " << e.what() << "\n";
    return kInputError;
  } catch (const GridError& e) {
    err << "vlab: domain error: " << e.what() << "\n";
    return kInputError;
  } catch (const std::invalid_argument& e) {
    err << "vlab: " << e.what() << "\n";
    return kInputError;
  } catch (const ConvergenceError& e) {
    err << "vlab: " << e.what() << "\n";
    return kInconclusive;
  } catch (const std::exception& e) {
    err << "vlab: " << e.what() << "\n";
    return kInputError;
  }
  return kInputError;
}

}  // namespace vlab::cli
