#include "rlab/report.hpp"

#include <cstdio>
#include <sstream>

namespace rlab::report {

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

Json verdict_json(const quad::IntegralVerdict& v) {
  Json j;
  j["status"] = quad::to_string(v.status);
  if (v.convergent()) {
    j["value"] = v.value;
    j["error_estimate"] = v.error_estimate;
  }
  if (!v.note.empty()) j["note"] = v.note;
  return j;
}

Json criteria_json(const classify::CriteriaReport& c) {
  Json j;
  j["moderate_criterion"] = verdict_json(c.moderate_criterion);
  auto put = [&](const char* k, const std::optional<double>& v) {
    if (v) j[k] = *v;
  };
  put("gamma_v_grow", c.gamma_v_grow);
  put("delta_u_decay", c.delta_u_decay);
  put("gamma_v_decay", c.gamma_v_decay);
  put("delta_u_grow", c.delta_u_grow);
  switch (c.equivalence_crosscheck) {
    case classify::CriteriaReport::CrossCheck::Pass: j["equivalence_crosscheck"] = "pass"; break;
    case classify::CriteriaReport::CrossCheck::Fail: j["equivalence_crosscheck"] = "fail"; break;
    default: j["equivalence_crosscheck"] = "skipped"; break;
  }
  j["window"] = {c.window_lo, c.window_hi};
  return j;
}

Json classify_json(const pipeline::Workspace& ws) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["case"] = classify::to_string(ws.eqclass.c);
  j["ip"] = verdict_json(ws.eqclass.ip);
  j["iq"] = verdict_json(ws.eqclass.iq);
  j["horizon"] = ws.scale.horizon_t;
  j["t_start"] = ws.coeffs.t_start;
  if (ws.menu) {
    Json menu = Json::array();
    for (const auto& m : ws.menu->menu) {
      Json e;
      e["tag"] = m.tag;
      e["x_limit"] = classify::to_string(m.x_limit);
      e["Dx_limit"] = classify::to_string(m.dx_limit);
      e["flavor"] = m.flavor == classify::Flavor::Extreme ? "extreme" : "moderate";
      menu.push_back(e);
    }
    j["terminal_state_menu"] = menu;
    j["menu_unresolved"] = ws.menu->unresolved;
  }
  if (ws.criteria) j["criteria"] = criteria_json(*ws.criteria);
  return j;
}

Json outcome_json(const pipeline::SolveOutcome& oc) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = riccati::to_string(oc.spec.kind);
  if (!oc.role.empty()) j["role"] = oc.role;
  j["applicable"] = oc.threshold.applicable;
  j["threshold"] = {{"T", oc.threshold.T},
                    {"measured", oc.threshold.measured},
                    {"bound", oc.threshold.bound},
                    {"detail", oc.threshold.detail}};
  if (oc.threshold.band_param) j["band_param"] = *oc.threshold.band_param;
  if (oc.ric) {
    j["iterations"] = oc.ric->iterations;
    j["final_delta"] = oc.ric->final_delta;
    j["in_band"] = oc.ric->in_band;
    j["anchor_correction"] = oc.ric->anchor_correction;
    j["contraction_history"] = oc.ric->contraction_history;
  }
  if (oc.sol) {
    j["principal"] = reproduce::to_string(oc.sol->principal);
    j["terminal_estimate"] =
        oc.sol->terminal_estimate ? Json(oc.sol->terminal_estimate->tag) : Json(nullptr);
    j["normalization"] = oc.sol->normalization;
    j["grid"] = {{"front", oc.sol->front()},
                 {"horizon", oc.sol->horizon()},
                 {"nodes", oc.sol->x.size()}};
  }
  if (!oc.error.empty()) j["error"] = oc.error;
  return j;
}

Json verification_json(const verify::VerificationReport& rep) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  Json checks = Json::array();
  for (const auto& c : rep.checks) {
    Json e;
    e["name"] = c.name;
    e["target"] = c.target;
    e["measured"] = c.measured;
    e["tolerance"] = c.tolerance;
    e["pass"] = c.pass;
    checks.push_back(e);
  }
  j["checks"] = checks;
  j["window"] = {rep.window_lo, rep.window_hi};
  j["notes"] = rep.notes;
  j["all_pass"] = rep.all_pass();
  return j;
}

std::string solution_csv(const reproduce::Solution& sol) {
  std::ostringstream os;
  os << "t,x,Dx\n";
  for (std::size_t i = 0; i < sol.x.size(); ++i)
    os << fmt17(sol.x.nodes()[i]) << ',' << fmt17(sol.x.value_at(i)) << ','
       << fmt17(sol.Dx.value_at(i)) << '\n';
  return os.str();
}

std::string classify_table(const pipeline::Workspace& ws) {
  std::ostringstream os;
  os << "case: " << classify::to_string(ws.eqclass.c) << '\n';
  os << "  I_p: " << quad::to_string(ws.eqclass.ip.status);
  if (ws.eqclass.ip.convergent())
    os << " = " << ws.eqclass.ip.value << " (+/- " << ws.eqclass.ip.error_estimate << ")";
  os << '\n';
  os << "  I_q: " << quad::to_string(ws.eqclass.iq.status);
  if (ws.eqclass.iq.convergent())
    os << " = " << ws.eqclass.iq.value << " (+/- " << ws.eqclass.iq.error_estimate << ")";
  os << '\n';
  if (ws.menu) {
    os << "terminal states:";
    for (const auto& m : ws.menu->menu) os << ' ' << m.tag;
    if (ws.menu->unresolved) os << "  (unresolved)";
    os << '\n';
  }
  if (ws.criteria) {
    const auto& c = *ws.criteria;
    os << "moderate criterion: " << quad::to_string(c.moderate_criterion.status) << '\n';
    auto put = [&](const char* name, const std::optional<double>& v) {
      if (v) os << "  " << name << " = " << *v << '\n';
    };
    put("gamma_v_grow", c.gamma_v_grow);
    put("delta_u_decay", c.delta_u_decay);
    put("gamma_v_decay", c.gamma_v_decay);
    put("delta_u_grow", c.delta_u_grow);
  }
  return os.str();
}

std::string verification_table(const verify::VerificationReport& rep) {
  std::ostringstream os;
  for (const auto& c : rep.checks)
    os << (c.pass ? "PASS " : "FAIL ") << c.name << ": measured " << c.measured
       << " (tolerance " << c.tolerance << ", " << c.target << ")\n";
  for (const auto& n : rep.notes) os << "note: " << n << '\n';
  os << (rep.all_pass() ? "ALL PASS" : "FAILURES PRESENT") << '\n';
  return os.str();
}

}  // namespace rlab::report
