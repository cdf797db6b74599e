#include "rlab/classify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rlab::classify {

using quad::IntegralVerdict;

const char* to_string(Case c) {
  switch (c) {
    case Case::I: return "case_I";
    case Case::II: return "case_II";
    case Case::III: return "case_III";
    case Case::Both: return "case_both";
    default: return "unknown";
  }
}

const char* to_string(LimitKind k) {
  switch (k) {
    case LimitKind::Zero: return "zero";
    case LimitKind::FiniteNonzero: return "finite-nonzero";
    default: return "infinite";
  }
}

const std::vector<TerminalStateType>& terminal_state_table() {
  using L = LimitKind;
  static const std::vector<TerminalStateType> table = {
      {"I(i)", L::Infinite, L::FiniteNonzero, Flavor::Moderate},
      {"I(ii)", L::Infinite, L::Infinite, Flavor::Extreme},
      {"I(iii)", L::FiniteNonzero, L::Zero, Flavor::Moderate},
      {"I(iv)", L::Zero, L::Zero, Flavor::Extreme},
      {"II(i)", L::FiniteNonzero, L::Infinite, Flavor::Moderate},
      {"II(ii)", L::Infinite, L::Infinite, Flavor::Extreme},
      {"II(iii)", L::Zero, L::FiniteNonzero, Flavor::Moderate},
      {"II(iv)", L::Zero, L::Zero, Flavor::Extreme},
      {"III(i)", L::FiniteNonzero, L::FiniteNonzero, Flavor::Moderate},
      {"III(ii)", L::Zero, L::FiniteNonzero, Flavor::Moderate},
      {"III(iii)", L::FiniteNonzero, L::Zero, Flavor::Moderate},
  };
  return table;
}

const TerminalStateType* terminal_state_by_tag(const std::string& tag) {
  for (const auto& t : terminal_state_table())
    if (t.tag == tag) return &t;
  return nullptr;
}

std::optional<TerminalStateType> terminal_state_from_limits(Case c, LimitKind x,
                                                            LimitKind dx) {
  std::string prefix;
  switch (c) {
    case Case::I:
    case Case::Both: prefix = "I("; break;
    case Case::II: prefix = "II("; break;
    case Case::III: prefix = "III("; break;
    default: return std::nullopt;
  }
  for (const auto& t : terminal_state_table()) {
    if (t.tag.substr(0, prefix.size()) != prefix) continue;
    if (t.x_limit == x && t.dx_limit == dx) {
      if (c == Case::Both && t.flavor != Flavor::Extreme) continue;
      return t;
    }
  }
  return std::nullopt;
}

std::vector<double> scale_log_grid(const quad::Fn& xi, double t_lo, double t_hi,
                                   std::size_t n) {
  if (!(t_hi > t_lo) || n < 2) throw std::invalid_argument("bad grid request");
  double x_lo = xi(t_lo), x_hi = xi(t_hi);
  if (!(x_hi > x_lo)) throw std::invalid_argument("scale not increasing on grid span");
  // Guard a vanishing left scale value (P at its own base point).
  double anchor = std::max(x_lo, x_hi * std::pow(2.0, -48));
  std::vector<double> nodes;
  nodes.reserve(n);
  nodes.push_back(t_lo);
  double ratio = x_hi / anchor;
  double prev = t_lo;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    double x = anchor * std::pow(ratio, double(i) / double(n - 1));
    double t = quad::monotone_inverse(xi, x, prev, t_hi);
    if (t > prev + 1e-14 * (std::abs(prev) + 1.0) && t < t_hi) {
      nodes.push_back(t);
      prev = t;
    }
  }
  nodes.push_back(t_hi);
  return nodes;
}

ScaleInfo make_scale(const Coefficients& c, const ClassifyConfig& cfg) {
  ScaleInfo s;
  auto p = c.p_fn();
  quad::Fn inv_p = [p](double t) { return 1.0 / p(t); };

  // The I_p probe runs in plain t with its own horizon; q is not involved.
  quad::TailConfig pc = cfg.tail;
  pc.horizon = cfg.p_probe_horizon;
  pc.scale = nullptr;
  s.ip = quad::classify_improper(inv_p, c.t_start, pc);

  s.P_base = c.a;
  try {
    (void)p(c.a);
    s.P = std::make_shared<quad::CachedIntegral>(inv_p, c.a, cfg.tail.panel_rel_tol);
  } catch (const std::exception&) {
    s.P_base = c.t_start;
    s.P = std::make_shared<quad::CachedIntegral>(inv_p, c.t_start, cfg.tail.panel_rel_tol);
  }

  if (s.ip.convergent()) {
    s.Ip_total =
        s.ip.value + quad::integrate(inv_p, s.P_base, c.t_start, cfg.tail.panel_rel_tol);
    auto P = s.P;
    double total = s.Ip_total;
    // Guard the difference against roundoff once P has numerically saturated.
    s.xi = [P, total](double t) { return 1.0 / std::max(total - (*P)(t), 1e-300); };
  } else {
    auto P = s.P;
    s.xi = [P](double t) { return (*P)(t); };
  }

  if (cfg.horizon_override) {
    s.horizon_t = *cfg.horizon_override;
  } else {
    // Where the scale variable reaches horizon_scale.  The search cap only
    // guards against coefficients whose scale grows absurdly slowly in t.
    double lo = std::max(c.t_start, s.P_base);
    double cap = std::max(cfg.p_probe_horizon, 1e4 * cfg.horizon_scale);
    s.horizon_t = quad::monotone_inverse(s.xi, cfg.horizon_scale, lo, cap);
  }
  return s;
}

namespace {

Case case_from(const IntegralVerdict& ip, const IntegralVerdict& iq) {
  if (ip.inconclusive() || iq.inconclusive()) return Case::Unknown;
  bool ipd = ip.divergent(), iqd = iq.divergent();
  if (ipd && iqd) return Case::Both;
  if (ipd) return Case::I;
  if (iqd) return Case::II;
  return Case::III;
}

}  // namespace

EquationClass classify_equation(const Coefficients& c, const ClassifyConfig& cfg,
                                const ScaleInfo& scale) {
  EquationClass ec;
  ec.ip = scale.ip;
  quad::TailConfig qc = cfg.tail;
  qc.horizon = scale.horizon_t;
  qc.scale = scale.xi;
  ec.iq = quad::classify_improper(c.q_fn(), c.t_start, qc);
  ec.c = case_from(ec.ip, ec.iq);
  return ec;
}

EquationClass classify_equation(const Coefficients& c, const ClassifyConfig& cfg) {
  return classify_equation(c, cfg, make_scale(c, cfg));
}

CriteriaReport extremity_conditions(const Coefficients& c, const EquationClass& ec,
                                    const ScaleInfo& scale, const ClassifyConfig& cfg) {
  if (ec.c != Case::I && ec.c != Case::II)
    throw std::invalid_argument("extremity conditions apply to case I or II only");

  CriteriaReport rep;
  auto p = c.p_fn();
  auto q = c.q_fn();
  auto P = scale.P;

  quad::TailConfig tc = cfg.tail;
  tc.horizon = scale.horizon_t;
  tc.scale = scale.xi;

  auto nodes = scale_log_grid(scale.xi, c.t_start, scale.horizon_t, cfg.probe_points);

  double t_probe = quad::monotone_inverse(scale.xi, cfg.probe_window_scale, c.t_start,
                                          scale.horizon_t);
  rep.window_lo = t_probe;
  rep.window_hi = scale.horizon_t;

  auto sup_over_window = [&](const std::vector<double>& ratio) {
    double sup = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i)
      if (nodes[i] >= t_probe && std::isfinite(ratio[i])) sup = std::max(sup, ratio[i]);
    return sup;
  };

  if (ec.c == Case::I) {
    rep.moderate_criterion =
        quad::tail_integral([&](double s) { return q(s) * (*P)(s); }, c.t_start, tc);

    // Growth ratio gating the v-construction: (int q P^2) / P.
    auto cumQP2 = quad::cumulative_integral(
        [&](double s) { return q(s) * (*P)(s) * (*P)(s); }, c.t_start, nodes,
        tc.panel_rel_tol);
    std::vector<double> ratio(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i)
      ratio[i] = cumQP2.value_at(i) / (*P)(nodes[i]);
    rep.gamma_v_grow = sup_over_window(ratio);

    // Decay ratio gating the u-construction: (int_t^inf rho^2/p) / rho.
    auto rho = quad::tail_grid(q, nodes, tc);
    auto rho_fn = rho.g;
    auto suf = quad::tail_grid(
        [&, rho_fn](double s) { return rho_fn(s) * rho_fn(s) / p(s); }, nodes, tc);
    std::vector<double> dratio(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i)
      dratio[i] = suf.g.value_at(i) / rho.g.value_at(i);
    rep.delta_u_decay = sup_over_window(dratio);

    // The two equivalent forms of the moderate criterion, int qP and
    // int rho/p, must agree.  Integrating from t_start instead of the base
    // point of P shifts the identity by the boundary term rho(t0) P(t0).
    auto v2 = quad::tail_integral([&, rho_fn](double s) { return rho_fn(s) / p(s); },
                                  c.t_start, tc);
    const auto& v1 = rep.moderate_criterion;
    if (v1.inconclusive() || v2.inconclusive()) {
      rep.equivalence_crosscheck = CriteriaReport::CrossCheck::Skipped;
    } else if (v1.status != v2.status) {
      rep.equivalence_crosscheck = CriteriaReport::CrossCheck::Fail;
    } else if (v1.convergent()) {
      double boundary = rho.g.value_at(0) * (*P)(nodes.front());
      double lhs = v1.value - boundary;
      bool ok = std::abs(lhs - v2.value) <= 0.01 * std::max(std::abs(v2.value), 1e-300);
      rep.equivalence_crosscheck =
          ok ? CriteriaReport::CrossCheck::Pass : CriteriaReport::CrossCheck::Fail;
    } else {
      rep.equivalence_crosscheck = CriteriaReport::CrossCheck::Pass;
    }
  } else {
    // Case II: pi replaces P, and Q = int_{t0}^t q replaces rho.
    auto pi = quad::tail_grid([&](double s) { return 1.0 / p(s); }, nodes, tc);
    auto pi_fn = pi.g;
    rep.moderate_criterion = quad::tail_integral(
        [&, pi_fn](double s) { return q(s) * pi_fn(s); }, c.t_start, tc);

    auto sufQpi2 = quad::tail_grid(
        [&, pi_fn](double s) { return q(s) * pi_fn(s) * pi_fn(s); }, nodes, tc);
    std::vector<double> ratio(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i)
      ratio[i] = sufQpi2.g.value_at(i) / pi.g.value_at(i);
    rep.gamma_v_decay = sup_over_window(ratio);

    auto Q = quad::cumulative_integral(q, c.t_start, nodes, tc.panel_rel_tol);
    auto cumQ2p = quad::cumulative_integral(
        [&, Q](double s) { return Q(s) * Q(s) / p(s); }, c.t_start, nodes,
        tc.panel_rel_tol);
    std::vector<double> dratio(nodes.size(), std::numeric_limits<double>::quiet_NaN());
    for (std::size_t i = 1; i < nodes.size(); ++i)
      dratio[i] = cumQ2p.value_at(i) / Q.value_at(i);
    rep.delta_u_grow = sup_over_window(dratio);

    auto v2 =
        quad::tail_integral([&, Q](double s) { return Q(s) / p(s); }, c.t_start, tc);
    const auto& v1 = rep.moderate_criterion;
    if (v1.inconclusive() || v2.inconclusive()) {
      rep.equivalence_crosscheck = CriteriaReport::CrossCheck::Skipped;
    } else if (v1.status != v2.status) {
      rep.equivalence_crosscheck = CriteriaReport::CrossCheck::Fail;
    } else if (v1.convergent()) {
      // Q vanishes at t_start, so no boundary term here.
      bool ok =
          std::abs(v1.value - v2.value) <= 0.01 * std::max(std::abs(v2.value), 1e-300);
      rep.equivalence_crosscheck =
          ok ? CriteriaReport::CrossCheck::Pass : CriteriaReport::CrossCheck::Fail;
    } else {
      rep.equivalence_crosscheck = CriteriaReport::CrossCheck::Pass;
    }
  }
  return rep;
}

MenuResult terminal_state_menu(const EquationClass& ec, const CriteriaReport& criteria) {
  if (ec.c == Case::Unknown)
    throw std::invalid_argument("terminal-state menu needs a determinate class");

  auto pick = [&](std::initializer_list<const char*> tags) {
    MenuResult r;
    for (const char* tag : tags) r.menu.push_back(*terminal_state_by_tag(tag));
    return r;
  };

  switch (ec.c) {
    case Case::III: return pick({"III(i)", "III(ii)", "III(iii)"});
    case Case::Both: return pick({"I(ii)", "I(iv)"});
    case Case::I: {
      if (criteria.moderate_criterion.convergent()) return pick({"I(i)", "I(iii)"});
      if (criteria.moderate_criterion.divergent()) return pick({"I(ii)", "I(iv)"});
      auto r = pick({"I(i)", "I(ii)", "I(iii)", "I(iv)"});
      r.unresolved = true;
      return r;
    }
    case Case::II: {
      if (criteria.moderate_criterion.convergent()) return pick({"II(i)", "II(iii)"});
      if (criteria.moderate_criterion.divergent()) return pick({"II(ii)", "II(iv)"});
      auto r = pick({"II(i)", "II(ii)", "II(iii)", "II(iv)"});
      r.unresolved = true;
      return r;
    }
    default: break;
  }
  throw std::logic_error("unreachable");
}

}  // namespace rlab::classify
