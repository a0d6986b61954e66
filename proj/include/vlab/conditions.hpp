#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "vlab/grid.hpp"
#include "vlab/maximal.hpp"

namespace vlab {

enum class Verdict { holds, fails, inconclusive };
const char* verdict_name(Verdict v);

// Thresholds shared by every decision rule.
inline constexpr double kEpsTie = 1e-12;
inline constexpr double kDeltaStab = 1e-9;
inline constexpr double kDeltaGrow = 1e-6;

// A table of measurements along a truncation schedule. Column 0 is the
// radius; rows are in schedule order.
struct Evidence {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

struct ConditionReport {
  std::string condition;
  Verdict verdict = Verdict::inconclusive;
  Evidence evidence;
  std::vector<std::pair<std::string, double>> parameters;
  std::vector<std::string> notes;
};

struct Range {
  double lo;
  double hi;
};

// (p_-, p_+) over the cells of `region`: exact min and max of the samples.
Range ess_range(const ExponentField& p, const GridDomain& region);
Range ess_range(const ExponentField& p);

// Decision on a non-decreasing sequence sampled along a schedule. Increments
// start from zero before the first radius.
enum class Trend { stable, growing, unclear };
Trend classify_growth(const std::vector<double>& partial);

ConditionReport check_finite_measure(const ExponentField& p, const ExponentField& q);

// Sublevel-set form of touching at infinity: p and q touch iff
// s = p_+(Omega) = q_-(Omega) and |{p <= s - eps}|, |{q >= s + eps}| are
// finite for every eps > 0. The proof is in docs/touching_at_infinity.md.
ConditionReport check_touching(const ExponentField& p, const ExponentField& q,
                               const TruncationSchedule& schedule,
                               const std::vector<double>& eps_grid = {1.0, 0.5, 0.25});

// Defect exponent 1/r = 1/p - 1/q on D = {q - p > kEpsTie}.
struct DefectField {
  DomainPtr d;
  std::optional<GridFunction> r;  // empty when D is empty
};
DefectField defect_exponent(const ExponentField& p, const ExponentField& q);

// Partial integrals of lambda^{-r} over D ∩ B(0, R_k).
ConditionReport defect_integral_estimate(const DefectField& rf, double lambda,
                                         const TruncationSchedule& schedule);

// p <= q everywhere and the defect integral converges for some lambda.
ConditionReport check_embedding(const ExponentField& p, const ExponentField& q,
                                const TruncationSchedule& schedule,
                                const std::vector<double>& lambdas = {1.5, 2.0, 4.0, 8.0});

struct OmegaCertificate {
  bool issued = false;
  std::string reason;  // why it was withheld
  double lambda = 0.0;
  double kappa = 0.0;
  double p_plus = 0.0;
  DomainPtr d;
  std::optional<GridFunction> omega;
  // log_lambda of the two sup-norms ||omega^{-|p_+ - p|}||_inf and
  // ||omega^{-|q - p_+|}||_inf, and the norms themselves.
  double exponent_p = 0.0;
  double exponent_q = 0.0;
  double sup_p = 1.0;
  double sup_q = 1.0;
  double measure_e = 0.0;                // |D ∩ E_{q,kappa}| on the largest truncation
  std::vector<double> partial_modulars;  // rho_{p,D ∩ B(0,R_k)}(omega)
  bool omega_in_range = false;           // 0 < omega <= 1
  bool sup_bounds_hold = false;          // each sup <= lambda^kappa
  bool product_bound_holds = false;      // product <= lambda^{2 kappa}
  bool modular_stabilized = false;       // final increment < 1e-6 relative
  ConditionReport report;
};

struct OmegaOptions {
  // Candidate kappas; empty means {p_+ + 1, p_+ + 1/2, p_+ + 1/4}.
  std::vector<double> kappa_candidates;
  std::vector<double> touching_eps = {1.0, 0.5, 0.25};
};

// omega = lambda^{-r/p} on D \ E_{q,kappa}, 1 on D ∩ E_{q,kappa}, with kappa
// the smallest candidate whose E_{q,kappa} = {q > kappa} has stabilizing
// measure on the schedule.
OmegaCertificate construct_omega(const ExponentField& p, const ExponentField& q, double lambda,
                                 const TruncationSchedule& schedule, const OmegaOptions& opts = {});
// The same construction for a fixed kappa, without admissibility checks.
OmegaCertificate build_omega(const ExponentField& p, const ExponentField& q, double lambda,
                             double kappa, const TruncationSchedule& schedule);

// With q = p: holds iff p is constant and > 1.
ConditionReport check_lerner(const ExponentField& p);

// Grid-aligned cubes meeting the bounding box: 1D intervals inside the box,
// 2D squares with side up to the longer box side, overhanging into padding.
std::vector<Window> enumerate_cubes(const GridDomain& dom);
// p_+(Q ∩ Omega), q_-(Q ∩ Omega); nullopt when Q misses Omega.
std::optional<std::pair<double, double>> cube_extremes(const ExponentField& p, const ExponentField& q,
                                                       const Window& cube);
// Every cube satisfies p_+(Q) <= q_-(Q) + kEpsTie.
bool all_cubes_satisfy(const ExponentField& p, const ExponentField& q);
// Sub-domain of the masked cells inside a cube.
GridDomain cube_region(const GridDomain& dom, const Window& cube);

}  // namespace vlab
