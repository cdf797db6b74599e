#include "rlab/reproduce.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace rlab::reproduce {

using quad::GridFunction;
using quad::TailConfig;

const char* to_string(Variant v) {
  return v == Variant::Cumulative ? "cumulative" : "tail";
}

const char* to_string(Solution::Principal p) {
  switch (p) {
    case Solution::Principal::Principal: return "principal";
    case Solution::Principal::Nonprincipal: return "nonprincipal";
    default: return "undetermined";
  }
}

namespace {

// Sign of the Riccati function over the last quarter of the grid decides the
// principal flag: eventually negative means decreasing x, hence principal.
Solution::Principal principal_from_sign(const GridFunction& f) {
  std::size_t n = f.size();
  bool pos = true, neg = true;
  for (std::size_t i = (3 * n) / 4; i < n; ++i) {
    pos = pos && f.value_at(i) > 0.0;
    neg = neg && f.value_at(i) < 0.0;
  }
  if (neg) return Solution::Principal::Principal;
  if (pos) return Solution::Principal::Nonprincipal;
  return Solution::Principal::Undetermined;
}

// Exponent column for the reproducing formulas: cumulative prefix of g from
// the grid front, or the suffix integral to the horizon (with tail estimate).
std::vector<double> exponent_column(const quad::Fn& g, const GridFunction& grid_src,
                                    Variant variant, const TailConfig& tail) {
  const auto& nodes = grid_src.nodes();
  std::vector<double> E(nodes.size(), 0.0);
  if (variant == Variant::Cumulative) {
    for (std::size_t i = 1; i < nodes.size(); ++i)
      E[i] = E[i - 1] + quad::integrate(g, nodes[i - 1], nodes[i], tail.panel_rel_tol);
  } else {
    auto suf = quad::tail_grid(g, nodes, tail);
    for (std::size_t i = 0; i < nodes.size(); ++i) E[i] = -suf.g.value_at(i);
  }
  for (double e : E)
    if (std::abs(e) > 700.0)
      throw ReproduceError("reproducing exponent overflows; shrink the horizon");
  return E;
}

void check_variant(const quad::Fn& g, double T, Variant variant, const TailConfig& tail,
                   const char* what) {
  quad::IntegralVerdict v = quad::tail_integral(g, T, tail);
  if (variant == Variant::Tail && v.divergent())
    throw ReproduceError(std::string(what) +
                         ": tail variant requested but the exponent integral diverges");
  if (variant == Variant::Cumulative && v.convergent())
    throw ReproduceError(std::string(what) +
                         ": cumulative variant requested but the exponent integral converges");
}

Solution finish(std::vector<double> nodes, std::vector<double> x, std::vector<double> Dx,
                std::string source, Solution::Principal principal, double scale) {
  for (double v : x)
    if (!(v > 0.0))
      throw ReproduceError("reproduced solution is not positive on the grid");
  Solution s;
  s.x = GridFunction(nodes, std::move(x));
  s.Dx = GridFunction(std::move(nodes), std::move(Dx));
  s.source = std::move(source);
  s.principal = principal;
  s.normalization = scale;
  return s;
}

}  // namespace

Solution reproduce_from_grid(const GridFunction& f, riccati::RiccatiEquation eq,
                             const Coefficients& c, Variant variant, double scale,
                             const TailConfig& tail0) {
  TailConfig tail = tail0;
  tail.horizon = f.horizon();
  auto p = c.p_fn();
  auto q = c.q_fn();
  const auto& nodes = f.nodes();

  if (eq == riccati::RiccatiEquation::First) {
    quad::Fn g = [p, f](double s) { return f(s) / p(s); };
    check_variant(g, nodes.front(), variant, tail, "from_u");
    auto E = exponent_column(g, f, variant, tail);
    std::vector<double> x(nodes.size()), Dx(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      x[i] = scale * std::exp(E[i]);
      Dx[i] = f.value_at(i) * x[i];
    }
    return finish(nodes, std::move(x), std::move(Dx),
                  std::string("from_u(") + to_string(variant) + ")",
                  principal_from_sign(f), scale);
  }

  // Second equation: x = s v exp(int q v), Dx = x / v.
  for (std::size_t i = 0; i < f.size(); ++i)
    if (f.value_at(i) == 0.0) throw ReproduceError("v vanishes on the grid");
  quad::Fn g = [q, f](double s) { return q(s) * f(s); };
  check_variant(g, nodes.front(), variant, tail, "from_v");
  auto E = exponent_column(g, f, variant, tail);
  std::vector<double> x(nodes.size()), Dx(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    x[i] = scale * f.value_at(i) * std::exp(E[i]);
    Dx[i] = x[i] / f.value_at(i);
  }
  return finish(nodes, std::move(x), std::move(Dx),
                std::string("from_v(") + to_string(variant) + ")",
                principal_from_sign(f), scale);
}

Solution reproduce_from_u(const riccati::RiccatiSolution& u, const Coefficients& c,
                          Variant variant, double scale, const TailConfig& tail) {
  if (u.equation != riccati::RiccatiEquation::First)
    throw ReproduceError("reproduce_from_u needs a first-equation solution");
  return reproduce_from_grid(u.f, riccati::RiccatiEquation::First, c, variant, scale, tail);
}

Solution reproduce_from_v(const riccati::RiccatiSolution& v, const Coefficients& c,
                          Variant variant, double scale, const TailConfig& tail) {
  if (v.equation != riccati::RiccatiEquation::Second)
    throw ReproduceError("reproduce_from_v needs a second-equation solution");
  return reproduce_from_grid(v.f, riccati::RiccatiEquation::Second, c, variant, scale, tail);
}

Solution reproduce_from_u_alt(const riccati::RiccatiSolution& u, const Coefficients& c,
                              Variant variant, double scale, const TailConfig& tail0) {
  if (u.equation != riccati::RiccatiEquation::First)
    throw ReproduceError("reproduce_from_u_alt needs a first-equation solution");
  const GridFunction& f = u.f;
  for (std::size_t i = 0; i < f.size(); ++i)
    if (f.value_at(i) == 0.0) throw ReproduceError("u vanishes on the grid");

  TailConfig tail = tail0;
  tail.horizon = f.horizon();
  auto q = c.q_fn();
  const auto& nodes = f.nodes();
  quad::Fn g = [q, f](double s) { return q(s) / f(s); };
  check_variant(g, nodes.front(), variant, tail, "from_u_alt");
  auto E = exponent_column(g, f, variant, tail);
  std::vector<double> x(nodes.size()), Dx(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    x[i] = scale / f.value_at(i) * std::exp(E[i]);
    Dx[i] = f.value_at(i) * x[i];
  }
  return finish(nodes, std::move(x), std::move(Dx),
                std::string("from_u_alt(") + to_string(variant) + ")",
                principal_from_sign(f), scale);
}

Solution reproduce_from_v_exp(const riccati::RiccatiSolution& v, const Coefficients& c,
                              Variant variant, double scale, const TailConfig& tail0) {
  if (v.equation != riccati::RiccatiEquation::Second)
    throw ReproduceError("reproduce_from_v_exp needs a second-equation solution");
  const GridFunction& f = v.f;
  for (std::size_t i = 0; i < f.size(); ++i)
    if (f.value_at(i) == 0.0) throw ReproduceError("v vanishes on the grid");

  TailConfig tail = tail0;
  tail.horizon = f.horizon();
  auto p = c.p_fn();
  const auto& nodes = f.nodes();
  quad::Fn g = [p, f](double s) { return 1.0 / (p(s) * f(s)); };
  check_variant(g, nodes.front(), variant, tail, "from_v_exp");
  auto E = exponent_column(g, f, variant, tail);
  std::vector<double> x(nodes.size()), Dx(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    x[i] = scale * std::exp(E[i]);
    Dx[i] = x[i] / f.value_at(i);
  }
  return finish(nodes, std::move(x), std::move(Dx),
                std::string("from_v_exp(") + to_string(variant) + ")",
                principal_from_sign(f), scale);
}

Solution companion_nonprincipal(const Solution& sol, const Coefficients& c, double T) {
  const auto& nodes = sol.x.nodes();
  if (std::abs(T - nodes.front()) > 1e-9 * (1.0 + std::abs(T)))
    throw ReproduceError("companion must start at the solution's first node");
  auto p = c.p_fn();
  const GridFunction& x = sol.x;
  quad::Fn g = [p, x](double s) {
    double xs = x(s);
    return 1.0 / (p(s) * xs * xs);
  };
  // The companion vanishes at T itself; return the grid from the next node.
  std::vector<double> I(nodes.size(), 0.0);
  for (std::size_t i = 1; i < nodes.size(); ++i)
    I[i] = I[i - 1] + quad::integrate(g, nodes[i - 1], nodes[i], 1e-10);
  std::vector<double> n2(nodes.begin() + 1, nodes.end());
  std::vector<double> y(n2.size()), Dy(n2.size());
  for (std::size_t i = 0; i < n2.size(); ++i) {
    y[i] = sol.x.value_at(i + 1) * I[i + 1];
    Dy[i] = sol.Dx.value_at(i + 1) * I[i + 1] + 1.0 / sol.x.value_at(i + 1);
  }
  auto out = finish(std::move(n2), std::move(y), std::move(Dy), "companion_nonprincipal",
                    Solution::Principal::Nonprincipal, 1.0);
  return out;
}

Solution companion_principal(const Solution& sol, const Coefficients& c,
                             const TailConfig& tail0) {
  const auto& nodes = sol.x.nodes();
  TailConfig tail = tail0;
  tail.horizon = nodes.back();
  auto p = c.p_fn();
  const GridFunction& x = sol.x;
  quad::Fn g = [p, x](double s) {
    double xs = x(s);
    return 1.0 / (p(s) * xs * xs);
  };
  auto verdict = quad::tail_integral(g, nodes.front(), tail);
  if (verdict.divergent())
    throw NotApplicableError(
        "int dt/(p x^2) diverges: the input is already a principal solution");
  auto I = quad::tail_grid(g, nodes, tail);
  std::vector<double> y(nodes.size()), Dy(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    y[i] = sol.x.value_at(i) * I.g.value_at(i);
    Dy[i] = sol.Dx.value_at(i) * I.g.value_at(i) - 1.0 / sol.x.value_at(i);
  }
  return finish(nodes, std::move(y), std::move(Dy), "companion_principal",
                Solution::Principal::Principal, 1.0);
}

std::optional<classify::TerminalStateType> estimate_terminal_state(
    const Solution& sol, classify::Case c, const quad::Fn& xi, const TrendConfig& cfg) {
  const auto& nodes = sol.x.nodes();
  double x_hi = xi(nodes.back());
  double x_lo = xi(nodes.front());

  // Geometric checkpoints (factor sqrt(2)) over the last decade of the scale.
  std::vector<double> ts;
  for (int j = cfg.checkpoints; j >= 0; --j) {
    double target = x_hi / std::pow(std::sqrt(2.0), j);
    if (target <= x_lo) continue;
    ts.push_back(quad::monotone_inverse(xi, target, nodes.front(), nodes.back()));
  }
  if (ts.size() < 4) return std::nullopt;

  auto trend = [&](const GridFunction& g) -> std::optional<classify::LimitKind> {
    std::vector<double> r;
    for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
      double a = std::abs(g(ts[i]));
      double b = std::abs(g(ts[i + 1]));
      if (a == 0.0 && b == 0.0) return classify::LimitKind::Zero;
      if (a == 0.0) return std::nullopt;
      r.push_back(b / a);
    }
    bool finite = true, up = true, down = true;
    for (double ri : r) {
      finite = finite && std::abs(ri - 1.0) <= cfg.band;
      up = up && ri >= 1.0 + cfg.band;
      down = down && ri <= 1.0 - cfg.band;
    }
    if (finite) return classify::LimitKind::FiniteNonzero;
    if (up) return classify::LimitKind::Infinite;
    if (down) return classify::LimitKind::Zero;
    return std::nullopt;
  };

  auto xk = trend(sol.x);
  auto dk = trend(sol.Dx);
  if (!xk || !dk) return std::nullopt;
  return classify::terminal_state_from_limits(c, *xk, *dk);
}

}  // namespace rlab::reproduce
