#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "vlab/conditions.hpp"
#include "vlab/expr.hpp"
#include "vlab/grid.hpp"
#include "vlab/maximal.hpp"

namespace vlab {

// ---------------------------------------------------------------------------
// Random test families

struct FamilyOptions {
  std::size_t count = 100;
  std::uint64_t seed = 1;
  double amp_lo = 1e-2;
  double amp_hi = 1e2;
  std::size_t max_pieces = 6;
};

// Sums of indicator functions of random cell-aligned intervals (1D) or
// rectangles (2D) with log-uniform amplitudes. Deterministic per seed.
std::vector<GridFunction> random_step_functions(const DomainPtr& dom, const FamilyOptions& opts);

// ---------------------------------------------------------------------------
// Falsifier

struct TrajectoryPoint {
  double lambda = 0;
  double lhs = 0;        // rho_p(M f)
  double rhs = 0;        // c1 rho_q(f) + c2
  double lhs_bound = 0;  // |E_beta| (lambda |E_alpha| / |Q|)^beta
  double rhs_bound = 0;  // c1 |E_alpha| lambda^alpha + c2
  double radius = 0;     // tail mode: truncation radius
};

struct Witness {
  enum class Status { witness, none, budget_exhausted };
  Status status = Status::none;
  std::string mode = "cube";  // "cube" or "tail"
  Window cube;
  double p_plus_q = 0;  // p_+(Q)
  double q_minus_q = 0; // q_-(Q)
  double alpha = 0, beta = 0;
  DomainPtr e_alpha, e_beta;
  double measure_cube = 0;  // |Q|, padding included
  double measure_e_alpha = 0, measure_e_beta = 0;
  double c1 = 1, c2 = 1, threshold = 1e3;
  std::vector<TrajectoryPoint> trajectory;
  std::vector<std::string> notes;
};
const char* status_name(Witness::Status s);

struct FalsifyOptions {
  int budget = 20;  // lambda = 2^j, j = 1..budget
  double threshold = 1e3;
  double c1 = 1.0;
  double c2 = 1.0;
  double tail_eps = 0.5;  // tail mode: E = {q >= p_+ + eps}
};

// Searches grid-aligned cubes for p_+(Q) > q_-(Q) and drives f = lambda chi_{E_alpha}.
Witness falsify(const ExponentField& p, const ExponentField& q, const FalsifyOptions& opts = {});
// Infinite-measure variant: f = lambda chi_E with E = {q >= p_+ + eps} on
// growing truncations and lambda = 2^-j, j = 0..budget.
Witness falsify_tail(const ExponentField& p, const ExponentField& q, const TruncationSchedule& s,
                     const FalsifyOptions& opts = {});

// ---------------------------------------------------------------------------
// Constants and inequality checks

struct MemberResult {
  std::size_t index = 0;
  double lhs = 0;      // rho_p(T f)
  double rhs = 0;      // c1 rho_q(f) + c2
  double rho_q = 0;    // rho_q(f)
  bool pass = false;
  // Decomposition terms: I over the split set and its complement, F likewise.
  double i_split = 0, i_rest = 0, f_split = 0, f_rest = 0;
  bool decomposition_exact = false;
};

struct InequalityReport {
  std::string status;  // validated, violated, refused
  std::string mode;    // bounded, certificate, log
  std::string operator_name;
  double c_hat = 0;     // empirical operator constant on L^{p_+}
  double safety = 2.0;
  double c1 = 0, c2 = 0;
  double p_plus = 0;
  double measure = 0;
  double rho_omega = 0;
  double sup_p = 1, sup_q = 1;
  std::vector<MemberResult> holdout;
  double max_identity_deviation = 0;  // max |rho_p(Tf) - rho_q(f)| / rho_q(f)
  bool decomposition_exact = true;
  std::vector<std::string> notes;
};

struct ConstantsOptions {
  FamilyOptions calibration{100, 11};
  FamilyOptions holdout{50, 12};
  double safety = 2.0;
};

// Bounded Omega: c1 = s C, c2 = (s C + 1) |Omega| with C the empirical
// operator constant. With a certificate, the infinite-measure form
// c1 = s C (1 + A)(1 + B), c2 = (s C (1 + A) + 1) rho_{p,D}(omega), where A
// and B are the two sup-norms carried by the certificate.
InequalityReport estimate_constants(const ExponentField& p, const ExponentField& q,
                                    const Operator& t, const ConstantsOptions& opts = {},
                                    const OmegaCertificate* cert = nullptr);

struct LogHolderDiagnostic {
  double c0 = 0;
  double c_inf = 0;
  double p_inf = 0;
  std::array<double, 2> c0_pair{0, 0};  // x coordinates of the worst local pair
  double c_inf_at = 0;
};
LogHolderDiagnostic log_holder_diagnostic(const ExponentField& p);
// 1D: the diagnostic of expression p sampled on [a, b] at each cell size.
std::vector<LogHolderDiagnostic> log_holder_refinement(const Expr& p, double a, double b,
                                                       const std::vector<double>& hs);

struct LogCheckReport {
  double c_star = 0;
  double tail_integral = 0;
  std::vector<double> ratios;  // rho(Mf) / (rho(f) + tail) per member
  bool all_in_unit_ball = true;
  LogHolderDiagnostic diagnostic;
};
LogCheckReport modular_log_check(const ExponentField& p, const std::vector<GridFunction>& family,
                                 double rtol = 1e-9);

struct FourierCheckReport {
  std::string status;  // validated, violated, refused
  std::string reason;
  std::optional<ConditionReport> touching, integral;
  std::optional<OmegaCertificate> certificate;
  InequalityReport constants;
};
// Requires p_+ = 2 and p <= q. Bounded grids (no schedule) use the bounded
// constants; otherwise touching, the defect integral and an omega
// certificate must all come out positive first.
FourierCheckReport fourier_check(const ExponentField& p, const ExponentField& q,
                                 const std::optional<TruncationSchedule>& schedule,
                                 const ConstantsOptions& opts = {});

// ---------------------------------------------------------------------------
// Worked examples

struct ExampleReport {
  std::string id;
  std::string title;
  int exit_code = 0;
  std::vector<std::string> csv_header;
  std::vector<std::vector<double>> csv_rows;
  std::vector<ConditionReport> conditions;
  std::vector<std::pair<std::string, std::string>> facts;  // key, value
  std::vector<std::string> notes;
};

const std::vector<std::string>& example_ids();
// Throws std::invalid_argument for an unknown id.
ExampleReport reproduce_example(const std::string& id);

}  // namespace vlab
