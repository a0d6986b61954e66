#include "vlab/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace vlab {

Json number_json(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

namespace {

Json numbers_json(const std::vector<double>& v) {
  Json a = Json::array();
  for (double x : v) a.push_back(number_json(x));
  return a;
}

}  // namespace

Json to_json(const ModularValue& m) {
  Json j;
  j["value"] = number_json(m.value);
  j["overflow"] = m.overflow;
  j["h"] = m.h;
  j["measure"] = m.measure;
  return j;
}

Json to_json(const Evidence& e) {
  Json j;
  j["columns"] = e.columns;
  Json rows = Json::array();
  for (const auto& r : e.rows) rows.push_back(numbers_json(r));
  j["rows"] = rows;
  return j;
}

Json to_json(const ConditionReport& r) {
  Json j;
  j["condition"] = r.condition;
  j["verdict"] = verdict_name(r.verdict);
  Json params = Json::object();
  for (const auto& [k, v] : r.parameters) params[k] = number_json(v);
  j["parameters"] = params;
  j["evidence"] = to_json(r.evidence);
  j["notes"] = r.notes;
  return j;
}

Json to_json(const Window& w) {
  Json j;
  j["start"] = {w.start[0], w.start[1]};
  j["size"] = w.size;
  return j;
}

Json to_json(const Witness& w) {
  Json j;
  j["status"] = status_name(w.status);
  j["mode"] = w.mode;
  if (w.mode == "cube") {
    j["cube"] = to_json(w.cube);
    j["p_plus_cube"] = w.p_plus_q;
    j["q_minus_cube"] = w.q_minus_q;
    j["alpha"] = w.alpha;
    j["beta"] = w.beta;
    j["measure_cube"] = w.measure_cube;
  }
  j["measure_e_alpha"] = w.measure_e_alpha;
  j["measure_e_beta"] = w.measure_e_beta;
  j["e_alpha"] = w.e_alpha ? Json(serialize(*w.e_alpha)) : Json(nullptr);
  j["e_beta"] = w.e_beta ? Json(serialize(*w.e_beta)) : Json(nullptr);
  j["c1"] = w.c1;
  j["c2"] = w.c2;
  j["threshold"] = w.threshold;
  Json traj = Json::array();
  for (const auto& t : w.trajectory) {
    Json row;
    row["lambda"] = number_json(t.lambda);
    if (w.mode == "tail") row["radius"] = t.radius;
    row["lhs"] = number_json(t.lhs);
    row["rhs"] = number_json(t.rhs);
    if (w.mode == "cube") {
      row["lhs_bound"] = number_json(t.lhs_bound);
      row["rhs_bound"] = number_json(t.rhs_bound);
    }
    traj.push_back(row);
  }
  j["trajectory"] = traj;
  j["notes"] = w.notes;
  return j;
}

Json to_json(const InequalityReport& r) {
  Json j;
  j["status"] = r.status;
  j["mode"] = r.mode;
  j["operator"] = r.operator_name;
  j["c_hat"] = number_json(r.c_hat);
  j["safety"] = r.safety;
  j["c1"] = number_json(r.c1);
  j["c2"] = number_json(r.c2);
  j["p_plus"] = r.p_plus;
  j["measure"] = r.measure;
  if (r.mode == "certificate") {
    j["rho_omega"] = number_json(r.rho_omega);
    j["sup_p"] = number_json(r.sup_p);
    j["sup_q"] = number_json(r.sup_q);
  }
  j["decomposition_exact"] = r.decomposition_exact;
  j["max_identity_deviation"] = number_json(r.max_identity_deviation);
  Json hold = Json::array();
  for (const auto& m : r.holdout) {
    Json row;
    row["index"] = m.index;
    row["lhs"] = number_json(m.lhs);
    row["rhs"] = number_json(m.rhs);
    row["rho_q"] = number_json(m.rho_q);
    row["pass"] = m.pass;
    row["i_split"] = number_json(m.i_split);
    row["i_rest"] = number_json(m.i_rest);
    row["f_split"] = number_json(m.f_split);
    row["f_rest"] = number_json(m.f_rest);
    row["decomposition_exact"] = m.decomposition_exact;
    hold.push_back(row);
  }
  j["holdout"] = hold;
  j["notes"] = r.notes;
  return j;
}

Json to_json(const OmegaCertificate& c) {
  Json j;
  j["issued"] = c.issued;
  if (!c.issued) j["reason"] = c.reason;
  j["lambda"] = c.lambda;
  j["kappa"] = c.kappa;
  j["p_plus"] = c.p_plus;
  j["exponent_p"] = number_json(c.exponent_p);
  j["exponent_q"] = number_json(c.exponent_q);
  j["sup_p"] = number_json(c.sup_p);
  j["sup_q"] = number_json(c.sup_q);
  j["measure_e"] = c.measure_e;
  j["partial_modulars"] = numbers_json(c.partial_modulars);
  j["omega_in_range"] = c.omega_in_range;
  j["sup_bounds_hold"] = c.sup_bounds_hold;
  j["product_bound_holds"] = c.product_bound_holds;
  j["modular_stabilized"] = c.modular_stabilized;
  j["d"] = c.d ? Json(serialize(*c.d)) : Json(nullptr);
  if (c.omega && !c.omega->values().empty()) {
    const auto v = c.omega->values();
    j["omega_min"] = *std::min_element(v.begin(), v.end());
    j["omega_max"] = *std::max_element(v.begin(), v.end());
  }
  j["report"] = to_json(c.report);
  return j;
}

Json to_json(const LogHolderDiagnostic& d) {
  Json j;
  j["c0"] = number_json(d.c0);
  j["c_inf"] = number_json(d.c_inf);
  j["p_inf"] = d.p_inf;
  j["c0_pair"] = {d.c0_pair[0], d.c0_pair[1]};
  j["c_inf_at"] = d.c_inf_at;
  return j;
}

Json to_json(const FourierCheckReport& r) {
  Json j;
  j["status"] = r.status;
  if (!r.reason.empty()) j["reason"] = r.reason;
  if (r.touching) j["touching"] = to_json(*r.touching);
  if (r.integral) j["defect_integral"] = to_json(*r.integral);
  if (r.certificate) j["certificate"] = to_json(*r.certificate);
  if (r.status != "refused") j["constants"] = to_json(r.constants);
  return j;
}

Json to_json(const ExampleReport& r) {
  Json j;
  j["id"] = r.id;
  j["title"] = r.title;
  j["exit_code"] = r.exit_code;
  j["csv_header"] = r.csv_header;
  Json rows = Json::array();
  for (const auto& row : r.csv_rows) rows.push_back(numbers_json(row));
  j["csv_rows"] = rows;
  Json conds = Json::array();
  for (const auto& c : r.conditions) conds.push_back(to_json(c));
  j["conditions"] = conds;
  Json facts = Json::object();
  for (const auto& [k, v] : r.facts) facts[k] = v;
  j["facts"] = facts;
  j["notes"] = r.notes;
  return j;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string format_csv(const std::vector<std::string>& header,
                       const std::vector<std::vector<double>>& rows) {
  std::string out;
  for (std::size_t i = 0; i < header.size(); ++i) out += (i ? "," : "") + header[i];
  out += "\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ",";
      out += format_number(row[i]);
    }
    out += "\n";
  }
  return out;
}

}  // namespace vlab
