#include "rlab/riccati.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace rlab::riccati {

using classify::ScaleInfo;
using quad::GridFunction;
using quad::TailConfig;

const char* to_string(OperatorKind k) {
  switch (k) {
    case OperatorKind::ModerateU1: return "moderate_u_1";
    case OperatorKind::ModerateV1: return "moderate_v_1";
    case OperatorKind::ModerateV2: return "moderate_v_2";
    case OperatorKind::ModerateU2: return "moderate_u_2";
    case OperatorKind::Case3UOmega: return "case3_u_omega";
    case OperatorKind::Case3V: return "case3_v";
    case OperatorKind::Case3URho: return "case3_u_rho";
    case OperatorKind::ExtremeVGrow: return "extreme_v_grow";
    case OperatorKind::ExtremeUDecay: return "extreme_u_decay";
    case OperatorKind::ExtremeVDecay: return "extreme_v_decay";
    case OperatorKind::ExtremeUGrow: return "extreme_u_grow";
  }
  return "?";
}

std::optional<OperatorKind> kind_from_string(const std::string& name) {
  for (OperatorKind k :
       {OperatorKind::ModerateU1, OperatorKind::ModerateV1, OperatorKind::ModerateV2,
        OperatorKind::ModerateU2, OperatorKind::Case3UOmega, OperatorKind::Case3V,
        OperatorKind::Case3URho, OperatorKind::ExtremeVGrow, OperatorKind::ExtremeUDecay,
        OperatorKind::ExtremeVDecay, OperatorKind::ExtremeUGrow})
    if (name == to_string(k)) return k;
  return std::nullopt;
}

RiccatiEquation equation_of(OperatorKind k) {
  switch (k) {
    case OperatorKind::ModerateV1:
    case OperatorKind::ModerateV2:
    case OperatorKind::Case3V:
    case OperatorKind::ExtremeVGrow:
    case OperatorKind::ExtremeVDecay: return RiccatiEquation::Second;
    default: return RiccatiEquation::First;
  }
}

bool is_cumulative(OperatorKind k) {
  return k == OperatorKind::ModerateV1 || k == OperatorKind::ModerateU2 ||
         k == OperatorKind::ExtremeVGrow || k == OperatorKind::ExtremeUGrow;
}

bool is_contraction_kind(OperatorKind k) {
  switch (k) {
    case OperatorKind::ExtremeVGrow:
    case OperatorKind::ExtremeUDecay:
    case OperatorKind::ExtremeVDecay:
    case OperatorKind::ExtremeUGrow: return false;
    default: return true;
  }
}

namespace {

struct Columns {
  std::vector<double> nodes;
  GridFunction P, pi, rho, Q;  // only the ones a kind needs are populated
  bool has_P = false, has_pi = false, has_rho = false, has_Q = false;
  double tail_bound = 0.0;  // uncertainty of the tail estimates baked into pi/rho
};

Columns build_columns(const Coefficients& c, const ScaleInfo& scale, OperatorKind kind,
                      std::span<const double> nodes, const TailConfig& tail) {
  Columns col;
  col.nodes.assign(nodes.begin(), nodes.end());
  auto p = c.p_fn();
  auto q = c.q_fn();

  auto need_P = kind == OperatorKind::ModerateV1 || kind == OperatorKind::ExtremeVGrow;
  auto need_rho = kind == OperatorKind::ModerateU1 || kind == OperatorKind::Case3UOmega ||
                  kind == OperatorKind::Case3URho || kind == OperatorKind::ExtremeUDecay;
  auto need_pi = kind == OperatorKind::ModerateV2 || kind == OperatorKind::Case3V ||
                 kind == OperatorKind::ExtremeVDecay;
  auto need_Q = kind == OperatorKind::ModerateU2 || kind == OperatorKind::ExtremeUGrow;

  if (need_P) {
    std::vector<double> vals(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) vals[i] = scale.P_at(nodes[i]);
    col.P = GridFunction(col.nodes, std::move(vals));
    col.has_P = true;
  }
  if (need_rho) {
    auto r = quad::tail_grid(q, nodes, tail);
    col.rho = std::move(r.g);
    col.tail_bound = std::max(col.tail_bound, r.tail_bound);
    col.has_rho = true;
  }
  if (need_pi) {
    auto r = quad::tail_grid([p](double s) { return 1.0 / p(s); }, nodes, tail);
    col.pi = std::move(r.g);
    col.tail_bound = std::max(col.tail_bound, r.tail_bound);
    col.has_pi = true;
  }
  if (need_Q) {
    double offset = quad::integrate(q, c.t_start, nodes.front(), tail.panel_rel_tol);
    auto Qg = quad::cumulative_integral(q, nodes.front(), nodes, tail.panel_rel_tol);
    std::vector<double> vals(Qg.values());
    for (double& v : vals) v += offset;
    col.Q = GridFunction(col.nodes, std::move(vals));
    col.has_Q = true;
  }
  return col;
}

struct Band {
  std::vector<double> lo, hi;
};

Band band_for(OperatorKind kind, const OperatorSpec& spec, const Columns& col,
              double band_param) {
  const std::size_t n = col.nodes.size();
  Band b;
  b.lo.resize(n);
  b.hi.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    switch (kind) {
      case OperatorKind::ModerateU1:
      case OperatorKind::Case3URho: {
        double r = col.rho.value_at(i);
        b.lo[i] = -r;
        b.hi[i] = -0.5 * r;
        break;
      }
      case OperatorKind::ModerateV1: {
        double P = col.P.value_at(i);
        b.lo[i] = 0.5 * P;
        b.hi[i] = P;
        break;
      }
      case OperatorKind::ModerateV2:
      case OperatorKind::Case3V: {
        double pi = col.pi.value_at(i);
        b.lo[i] = -pi;
        b.hi[i] = -0.5 * pi;
        break;
      }
      case OperatorKind::ModerateU2: {
        double Q = col.Q.value_at(i);
        b.lo[i] = 0.5 * Q;
        b.hi[i] = Q;
        break;
      }
      case OperatorKind::Case3UOmega: {
        b.lo[i] = 0.5 * spec.omega;
        b.hi[i] = 1.5 * spec.omega;
        break;
      }
      case OperatorKind::ExtremeVGrow: {
        double P = col.P.value_at(i);
        b.lo[i] = (1.0 - band_param) * P;
        b.hi[i] = P;
        break;
      }
      case OperatorKind::ExtremeUDecay: {
        double r = col.rho.value_at(i);
        b.lo[i] = -r;
        b.hi[i] = -(1.0 - band_param) * r;
        break;
      }
      case OperatorKind::ExtremeVDecay: {
        double pi = col.pi.value_at(i);
        b.lo[i] = -pi;
        b.hi[i] = -(1.0 - band_param) * pi;
        break;
      }
      case OperatorKind::ExtremeUGrow: {
        double Q = col.Q.value_at(i);
        b.lo[i] = (1.0 - band_param) * Q;
        b.hi[i] = Q;
        break;
      }
    }
  }
  return b;
}

}  // namespace

ThresholdResult select_start_T(const Coefficients& c, const ScaleInfo& scale,
                               const OperatorSpec& spec, const PicardConfig& cfg,
                               const TailConfig& tail0) {
  TailConfig tail = tail0;
  tail.horizon = scale.horizon_t;
  tail.scale = scale.xi;

  auto p = c.p_fn();
  auto q = c.q_fn();
  auto P = scale.P;
  auto nodes = classify::scale_log_grid(scale.xi, c.t_start, scale.horizon_t, 513);

  ThresholdResult out;
  auto first_node_where = [&](const std::vector<double>& quantity, double bound,
                              const char* what) {
    out.bound = bound;
    out.measured = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      out.measured = std::min(out.measured, quantity[i]);
      if (quantity[i] <= bound) {
        out.applicable = true;
        out.T = nodes[i];
        out.detail = what;
        return;
      }
    }
    out.applicable = false;
    out.detail = std::string(what) + " never satisfied before the horizon";
  };

  const double fixed_bound = cfg.threshold_margin * 0.25;

  // Suffix quantities carry the uncertainty of their horizon tail, so a
  // divergent tail (huge bound) can never satisfy a smallness condition just
  // because the truncated suffix vanishes near the horizon.
  auto padded = [](const quad::TailGridResult& r) {
    std::vector<double> v(r.g.values());
    for (double& x : v) x += r.tail_bound;
    return v;
  };

  switch (spec.kind) {
    case OperatorKind::ModerateU1: {
      auto rho = quad::tail_grid(q, nodes, tail);
      auto rhog = rho.g;
      auto suf = quad::tail_grid([p, rhog](double s) { return rhog(s) / p(s); }, nodes, tail);
      first_node_where(padded(suf), fixed_bound, "int_T^inf rho/p <= 1/4");
      break;
    }
    case OperatorKind::ModerateV1: {
      auto suf = quad::tail_grid([q, P](double s) { return q(s) * (*P)(s); }, nodes, tail);
      first_node_where(padded(suf), fixed_bound, "int_T^inf q P <= 1/4");
      break;
    }
    case OperatorKind::ModerateV2: {
      auto pi = quad::tail_grid([p](double s) { return 1.0 / p(s); }, nodes, tail);
      auto pig = pi.g;
      auto suf = quad::tail_grid([q, pig](double s) { return q(s) * pig(s); }, nodes, tail);
      first_node_where(padded(suf), fixed_bound, "int_T^inf q pi <= 1/4");
      break;
    }
    case OperatorKind::ModerateU2: {
      double offset = quad::integrate(q, c.t_start, nodes.front(), tail.panel_rel_tol);
      auto Qg = quad::cumulative_integral(q, nodes.front(), nodes, tail.panel_rel_tol);
      auto Q = Qg.map([offset](double, double v) { return v + offset; });
      auto suf = quad::tail_grid([p, Q](double s) { return Q(s) / p(s); }, nodes, tail);
      first_node_where(padded(suf), fixed_bound, "int_T^inf Q/p <= 1/4");
      break;
    }
    case OperatorKind::Case3UOmega: {
      auto rho = quad::tail_grid(q, nodes, tail);
      auto pi = quad::tail_grid([p](double s) { return 1.0 / p(s); }, nodes, tail);
      auto rho_v = padded(rho);
      auto pi_v = padded(pi);
      double b1 = cfg.threshold_margin * spec.omega / 4.0;
      double b2 = cfg.threshold_margin / (9.0 * spec.omega);
      std::vector<double> worst(nodes.size());
      for (std::size_t i = 0; i < nodes.size(); ++i)
        worst[i] = std::max(rho_v[i] / b1, pi_v[i] / b2);
      first_node_where(worst, 1.0, "rho(T) <= omega/4 and pi(T) <= 1/(9 omega)");
      out.bound = 1.0;  // normalized
      break;
    }
    case OperatorKind::Case3V:
    case OperatorKind::Case3URho: {
      auto rho = quad::tail_grid(q, nodes, tail);
      auto pi = quad::tail_grid([p](double s) { return 1.0 / p(s); }, nodes, tail);
      auto rho_v = padded(rho);
      auto pi_v = padded(pi);
      std::vector<double> prod(nodes.size());
      for (std::size_t i = 0; i < nodes.size(); ++i)
        prod[i] = rho_v[i] * pi_v[i];
      first_node_where(prod, fixed_bound, "pi(T) rho(T) <= 1/4");
      break;
    }
    case OperatorKind::ExtremeVGrow:
    case OperatorKind::ExtremeUDecay:
    case OperatorKind::ExtremeVDecay:
    case OperatorKind::ExtremeUGrow: {
      // Criterion ratio, sup over the whole working interval.
      std::vector<double> ratio(nodes.size(), 0.0);
      if (spec.kind == OperatorKind::ExtremeVGrow) {
        auto cum = quad::cumulative_integral(
            [q, P](double s) { return q(s) * (*P)(s) * (*P)(s); }, c.t_start, nodes,
            tail.panel_rel_tol);
        for (std::size_t i = 0; i < nodes.size(); ++i)
          ratio[i] = cum.value_at(i) / (*P)(nodes[i]);
      } else if (spec.kind == OperatorKind::ExtremeUDecay) {
        auto rho = quad::tail_grid(q, nodes, tail);
        auto rhog = rho.g;
        auto suf = quad::tail_grid(
            [p, rhog](double s) { return rhog(s) * rhog(s) / p(s); }, nodes, tail);
        for (std::size_t i = 0; i < nodes.size(); ++i)
          ratio[i] = suf.g.value_at(i) / rho.g.value_at(i);
      } else if (spec.kind == OperatorKind::ExtremeVDecay) {
        auto pi = quad::tail_grid([p](double s) { return 1.0 / p(s); }, nodes, tail);
        auto pig = pi.g;
        auto suf = quad::tail_grid(
            [q, pig](double s) { return q(s) * pig(s) * pig(s); }, nodes, tail);
        for (std::size_t i = 0; i < nodes.size(); ++i)
          ratio[i] = suf.g.value_at(i) / pi.g.value_at(i);
      } else {
        double offset = quad::integrate(q, c.t_start, nodes.front(), tail.panel_rel_tol);
        auto Qg = quad::cumulative_integral(q, nodes.front(), nodes, tail.panel_rel_tol);
        auto Q = Qg.map([offset](double, double v) { return v + offset; });
        auto cum = quad::cumulative_integral([p, Q](double s) { return Q(s) * Q(s) / p(s); },
                                             nodes.front(), nodes, tail.panel_rel_tol);
        ratio[0] = 0.0;
        for (std::size_t i = 1; i < nodes.size(); ++i)
          ratio[i] = cum.value_at(i) / Q.value_at(i);
      }
      double sup = 0.0;
      for (double r : ratio)
        if (std::isfinite(r)) sup = std::max(sup, r);
      out.measured = sup;
      double gamma = spec.band_param.value_or(sup + cfg.band_headroom);
      out.band_param = gamma;
      out.bound = gamma;
      if (!(gamma < 1.0) || sup > gamma) {
        out.applicable = false;
        std::ostringstream os;
        os << "criterion ratio sup " << sup << " leaves no admissible band below 1";
        out.detail = os.str();
        return out;
      }
      // Earliest start point past which the running sup stays within gamma.
      double running = 0.0;
      std::size_t idx = nodes.size();
      for (std::size_t i = nodes.size(); i-- > 0;) {
        running = std::max(running, ratio[i]);
        if (running <= gamma) idx = i;
      }
      if (idx == nodes.size()) {
        out.applicable = false;
        out.detail = "criterion ratio exceeds the band parameter everywhere";
        return out;
      }
      out.applicable = true;
      out.T = nodes[idx];
      out.detail = "criterion ratio within the band parameter";
      break;
    }
  }
  return out;
}

RiccatiSolution picard_solve(const Coefficients& c, const ScaleInfo& scale,
                             const OperatorSpec& spec, double T, const PicardConfig& cfg,
                             const TailConfig& tail0) {
  TailConfig tail = tail0;
  tail.horizon = scale.horizon_t;
  tail.scale = scale.xi;

  auto p = c.p_fn();
  auto q = c.q_fn();

  double band_param = spec.band_param.value_or(0.5);
  auto nodes = classify::scale_log_grid(scale.xi, T, scale.horizon_t, cfg.nodes);
  Columns col = build_columns(c, scale, spec.kind, nodes, tail);
  Band band = band_for(spec.kind, spec, col, band_param);

  const std::size_t n = nodes.size();
  std::vector<double> weight(n);
  for (std::size_t i = 0; i < n; ++i)
    weight[i] = std::max({std::abs(band.lo[i]), std::abs(band.hi[i]), 1e-300});

  // Pre-history integral for the cumulative extreme kinds: the quadratic term
  // conceptually accumulates from the base point of the envelope, not from T.
  // Modelling the iterate as proportional to its envelope below T gives
  //   correction = (f(T)/E(T))^2 * int_base^T q E^2   (E = P),
  // which restores the scale-free fixed point the exact solutions satisfy.
  // When that integral does not exist the correction is zero and the operator
  // is simply anchored at T.
  double history = 0.0;
  if (spec.kind == OperatorKind::ExtremeVGrow) {
    try {
      history = quad::integrate(
          [&](double s) {
            double Ps = scale.P_at(s);
            return q(s) * Ps * Ps;
          },
          scale.P_base, T, tail.panel_rel_tol, nullptr, 50'000);
    } catch (const std::exception&) {
      history = 0.0;
    }
  } else if (spec.kind == OperatorKind::ExtremeUGrow && T > c.t_start) {
    try {
      quad::CachedIntegral Q(q, c.t_start, tail.panel_rel_tol);
      history = quad::integrate(
          [&](double s) {
            double Qs = Q(s);
            return Qs * Qs / p(s);
          },
          c.t_start, T, tail.panel_rel_tol, nullptr, 50'000);
    } catch (const std::exception&) {
      history = 0.0;
    }
  }

  // Start from the band midpoint.
  std::vector<double> f(n);
  for (std::size_t i = 0; i < n; ++i) f[i] = 0.5 * (band.lo[i] + band.hi[i]);

  const bool second = equation_of(spec.kind) == RiccatiEquation::Second;
  const bool cumulative = is_cumulative(spec.kind);

  RiccatiSolution sol;
  sol.equation = second ? RiccatiEquation::Second : RiccatiEquation::First;
  sol.T = T;
  sol.spec = spec;
  sol.in_band = true;
  sol.band_lo = GridFunction(col.nodes, band.lo);
  sol.band_hi = GridFunction(col.nodes, band.hi);

  double envelope_T = 0.0;
  if (spec.kind == OperatorKind::ExtremeVGrow) envelope_T = col.P.value_at(0);
  if (spec.kind == OperatorKind::ExtremeUGrow) envelope_T = col.Q.value_at(0);

  double prev_delta = -1.0;
  double tail_unc_weighted = 0.0;
  for (int iter = 1; iter <= cfg.max_iter; ++iter) {
    GridFunction cur(col.nodes, f);
    quad::Fn integrand;
    if (second) {
      integrand = [q, cur](double s) {
        double v = cur(s);
        return q(s) * v * v;
      };
    } else {
      integrand = [p, cur](double s) {
        double u = cur(s);
        return u * u / p(s);
      };
    }

    std::vector<double> next(n);
    double tail_unc = 0.0;
    if (cumulative) {
      std::vector<double> prefix(n, 0.0);
      for (std::size_t i = 1; i < n; ++i)
        prefix[i] = prefix[i - 1] +
                    quad::integrate(integrand, nodes[i - 1], nodes[i], tail.panel_rel_tol);
      double corr = 0.0;
      if (history != 0.0 && envelope_T > 0.0) {
        double z = f[0] / envelope_T;
        corr = z * z * history;
      }
      sol.anchor_correction = corr;
      for (std::size_t i = 0; i < n; ++i) {
        double base = 0.0;
        switch (spec.kind) {
          case OperatorKind::ModerateV1:
          case OperatorKind::ExtremeVGrow: base = col.P.value_at(i); break;
          default: base = col.Q.value_at(i); break;
        }
        next[i] = base - corr - prefix[i];
      }
    } else {
      auto suffix = quad::tail_grid(integrand, nodes, tail);
      tail_unc = suffix.tail_bound;
      for (std::size_t i = 0; i < n; ++i) {
        double base = 0.0;
        switch (spec.kind) {
          case OperatorKind::ModerateU1:
          case OperatorKind::Case3URho:
          case OperatorKind::ExtremeUDecay: base = -col.rho.value_at(i); break;
          case OperatorKind::ModerateV2:
          case OperatorKind::Case3V:
          case OperatorKind::ExtremeVDecay: base = -col.pi.value_at(i); break;
          case OperatorKind::Case3UOmega:
            base = spec.omega - col.rho.value_at(i);
            break;
          default: throw std::logic_error("unexpected tail kind");
        }
        next[i] = base + suffix.g.value_at(i);
      }
    }

    double delta = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      delta = std::max(delta, std::abs(next[i] - f[i]) / weight[i]);
    if (prev_delta > 0.0) sol.contraction_history.push_back(delta / prev_delta);
    prev_delta = delta;
    f = std::move(next);
    sol.iterations = iter;

    bool inside = true;
    double slack = 1e-9;
    for (std::size_t i = 0; i < n && inside; ++i)
      inside = f[i] >= band.lo[i] - slack * weight[i] &&
               f[i] <= band.hi[i] + slack * weight[i];
    if (!inside) sol.in_band = false;

    tail_unc_weighted = tail_unc / weight[n - 1];
    if (delta <= cfg.tol) {
      sol.final_delta = delta + tail_unc_weighted;
      sol.f = GridFunction(col.nodes, f);
      return sol;
    }
  }

  std::ostringstream os;
  os << to_string(spec.kind) << " did not converge in " << cfg.max_iter
     << " iterations (last weighted update " << prev_delta << ")";
  throw SolveError(os.str());
}

namespace {

GridFunction residual_impl(const quad::GridFunction& g, const Coefficients& c, bool first) {
  if (g.size() < 5) throw std::invalid_argument("residual needs at least 5 nodes");
  auto d = quad::grid_derivative(g.nodes(), g.values());
  std::vector<double> res(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    double t = g.nodes()[i];
    double val = g.value_at(i);
    if (first) {
      res[i] = d[i] - c.q(t) + val * val / c.p(t);
    } else {
      res[i] = d[i] - 1.0 / c.p(t) + c.q(t) * val * val;
    }
  }
  return GridFunction(g.nodes(), std::move(res), quad::InterpKind::Linear);
}

}  // namespace

GridFunction residual_u(const quad::GridFunction& u, const Coefficients& c) {
  return residual_impl(u, c, true);
}

GridFunction residual_v(const quad::GridFunction& v, const Coefficients& c) {
  return residual_impl(v, c, false);
}

}  // namespace rlab::riccati
