#include "rlab/verify.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace rlab::verify {

using quad::Fn;
using quad::GridFunction;
using reproduce::Solution;

bool VerificationReport::all_pass() const {
  for (const auto& ch : checks)
    if (!ch.pass) return false;
  return true;
}

RatioResult asymptotic_ratio(const Fn& f, const Fn& g, double lo, double hi,
                             const Fn& xi, double band, int ncheck) {
  if (ncheck < 4) throw std::invalid_argument("asymptotic_ratio needs >= 4 checkpoints");
  double x_lo = xi(lo), x_hi = xi(hi);
  if (!(x_hi > x_lo)) throw std::invalid_argument("empty asymptotic window");

  RatioResult out;
  double prev_t = lo;
  for (int j = 0; j < ncheck; ++j) {
    double x = x_lo * std::pow(x_hi / x_lo, double(j) / (ncheck - 1));
    double t = (j == 0) ? lo
                        : (j == ncheck - 1 ? hi : quad::monotone_inverse(xi, x, prev_t, hi));
    prev_t = t;
    double gv = g(t);
    if (gv == 0.0) throw std::invalid_argument("asymptotic_ratio: g vanishes on window");
    out.checkpoints.push_back(f(t) / gv);
  }

  const auto& r = out.checkpoints;
  std::size_t n = r.size();
  out.limit_estimate = r.back();
  double d1 = std::abs(r[n - 1] - 1.0);
  double d2 = std::abs(r[n - 2] - 1.0);
  double d3 = std::abs(r[n - 3] - 1.0);
  bool within = d1 <= band && d2 <= band && d3 <= band;
  bool shrinking = d1 <= d3 + 0.25 * band;
  out.equivalent = within && shrinking;
  return out;
}

WronskianResult wronskian(const Solution& x1, const Solution& x2) {
  const auto& n1 = x1.x.nodes();
  const auto& n2 = x2.x.nodes();
  std::vector<double> w;
  if (n1 == n2) {
    w.resize(n1.size());
    for (std::size_t i = 0; i < n1.size(); ++i)
      w[i] = x2.x.value_at(i) * x1.Dx.value_at(i) - x1.x.value_at(i) * x2.Dx.value_at(i);
  } else {
    double lo = std::max(n1.front(), n2.front());
    double hi = std::min(n1.back(), n2.back());
    if (!(hi > lo)) throw std::invalid_argument("wronskian: grids do not overlap");
    const int samples = 65;
    w.resize(samples);
    for (int i = 0; i < samples; ++i) {
      double t = lo + (hi - lo) * i / (samples - 1.0);
      w[i] = x2.x(t) * x1.Dx(t) - x1.x(t) * x2.Dx(t);
    }
  }
  WronskianResult res;
  double sum = 0.0;
  for (double v : w) sum += v;
  res.C = sum / double(w.size());
  double dev = 0.0;
  for (double v : w) dev = std::max(dev, std::abs(v - res.C));
  res.rel_variation = dev / std::max(std::abs(res.C), 1e-300);
  return res;
}

WronskianResult wronskian(const AnalyticSolution& x1, const AnalyticSolution& x2,
                          double lo, double hi, int samples) {
  std::vector<double> w(samples);
  for (int i = 0; i < samples; ++i) {
    double t = lo + (hi - lo) * i / (samples - 1.0);
    w[i] = x2.x(t) * x1.Dx(t) - x1.x(t) * x2.Dx(t);
  }
  WronskianResult res;
  double sum = 0.0;
  for (double v : w) sum += v;
  res.C = sum / double(w.size());
  double dev = 0.0;
  for (double v : w) dev = std::max(dev, std::abs(v - res.C));
  res.rel_variation = dev / std::max(std::abs(res.C), 1e-300);
  return res;
}

namespace {

// Central difference with a step adapted to the local logarithmic slope, so
// that the truncation error of stiff exponentials stays near roundoff.
double diff_central(const Fn& f, double t) {
  double unit = 1.0 + std::abs(t);
  double h0 = 1e-4 * unit;
  double f0 = f(t);
  double d0 = (f(t + h0) - f(t - h0)) / (2.0 * h0);
  double L = std::abs(d0) / std::max(std::abs(f0), 1e-300);
  double h = std::cbrt(3e-16) / std::max(L, 1.0 / unit);
  h = std::clamp(h, 1e-9 * unit, h0);
  return (f(t + h) - f(t - h)) / (2.0 * h);
}

}  // namespace

double equation_residual(const AnalyticSolution& s, const Coefficients& c, double t) {
  double lhs = diff_central(s.Dx, t);
  double rhs = c.q(t) * s.x(t);
  return std::abs(lhs - rhs) / std::max(std::abs(rhs), 1e-300);
}

double max_equation_residual(const AnalyticSolution& s, const Coefficients& c, double lo,
                             double hi, int samples) {
  double worst = 0.0;
  for (int i = 0; i < samples; ++i) {
    double t = lo + (hi - lo) * i / (samples - 1.0);
    worst = std::max(worst, equation_residual(s, c, t));
  }
  return worst;
}

double max_grid_equation_residual(const Solution& s, const Coefficients& c, double lo,
                                  double hi) {
  const auto& nodes = s.x.nodes();
  auto p = c.p_fn();
  double worst = 0.0;
  // Conservative second difference with p at the cell midpoints:
  //   (p x')'(t_i) ~ [p_{i+1/2}(x_{i+1}-x_i)/h_+ - p_{i-1/2}(x_i-x_{i-1})/h_-]
  //                  / ((h_+ + h_-)/2),
  // defined at interior nodes.
  for (std::size_t i = 1; i + 1 < nodes.size(); ++i) {
    if (nodes[i] < lo || nodes[i] > hi) continue;
    double hm = nodes[i] - nodes[i - 1];
    double hp = nodes[i + 1] - nodes[i];
    double flux_p =
        p(0.5 * (nodes[i] + nodes[i + 1])) * (s.x.value_at(i + 1) - s.x.value_at(i)) / hp;
    double flux_m =
        p(0.5 * (nodes[i] + nodes[i - 1])) * (s.x.value_at(i) - s.x.value_at(i - 1)) / hm;
    double lhs = (flux_p - flux_m) / (0.5 * (hp + hm));
    double rhs = c.q(nodes[i]) * s.x.value_at(i);
    worst = std::max(worst, std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs)));
  }
  return worst;
}

namespace {

void require_family(const Coefficients& c, std::initializer_list<const char*> tags) {
  for (const char* t : tags)
    if (c.family_tag == t) return;
  throw ConstructionError("oracle does not match family '" + c.family_tag + "'");
}

std::pair<double, double> power_exponents(double k) {
  double s = std::sqrt(1.0 + 4.0 * k);
  return {0.5 * (1.0 + s), 0.5 * (1.0 - s)};
}

}  // namespace

ExactOracle power_law_oracle(const Coefficients& c) {
  require_family(c, {"power_log_P"});
  if (c.param("lambda") != 2.0 || c.param("mu") != 0.0)
    throw ConstructionError("power-law oracle needs lambda = 2, mu = 0");
  auto [a1, a2] = power_exponents(c.param("k"));
  ExactOracle o;
  o.family_tag = c.family_tag;
  o.provenance = "exact pair P^alpha1, P^alpha2 for q = k/(p P^2)";
  auto Pex = *c.P_expr;
  auto params = c.params;
  for (double alpha : {a1, a2}) {
    AnalyticSolution s;
    std::ostringstream lbl;
    lbl << "P^" << alpha;
    s.label = lbl.str();
    s.x = [Pex, params, alpha](double t) { return std::pow(Pex.eval(t, params), alpha); };
    // Dx = p x' = alpha P^{alpha-1}.
    s.Dx = [Pex, params, alpha](double t) {
      return alpha * std::pow(Pex.eval(t, params), alpha - 1.0);
    };
    o.solutions.push_back(std::move(s));
  }
  return o;
}

ExactOracle power_law_pi_oracle(const Coefficients& c) {
  require_family(c, {"power_log_pi"});
  if (c.param("lambda") != 2.0 || c.param("mu") != 0.0)
    throw ConstructionError("power-law oracle needs lambda = 2, mu = 0");
  auto [a1, a2] = power_exponents(c.param("k"));
  ExactOracle o;
  o.family_tag = c.family_tag;
  o.provenance = "exact pair pi^alpha1, pi^alpha2 for q = k/(p pi^2)";
  auto piex = *c.pi_expr;
  auto params = c.params;
  for (double alpha : {a1, a2}) {
    AnalyticSolution s;
    std::ostringstream lbl;
    lbl << "pi^" << alpha;
    s.label = lbl.str();
    s.x = [piex, params, alpha](double t) { return std::pow(piex.eval(t, params), alpha); };
    // Dx = p x' = -alpha pi^{alpha-1}.
    s.Dx = [piex, params, alpha](double t) {
      return -alpha * std::pow(piex.eval(t, params), alpha - 1.0);
    };
    o.solutions.push_back(std::move(s));
  }
  return o;
}

ExactOracle constant_coefficient_oracle(const Coefficients& c) {
  require_family(c, {"constant_q"});
  if (!c.P_expr)
    throw ConstructionError("constant-coefficient oracle needs the closed form of P");
  double k = c.param("k");
  ExactOracle o;
  o.family_tag = c.family_tag;
  o.provenance = "exact pair exp(+-k P) for q = k^2/p";
  auto Pex = *c.P_expr;
  auto params = c.params;
  for (double sgn : {-1.0, +1.0}) {
    AnalyticSolution s;
    s.label = sgn > 0 ? "exp(+kP)" : "exp(-kP)";
    s.x = [Pex, params, k, sgn](double t) { return std::exp(sgn * k * Pex.eval(t, params)); };
    s.Dx = [Pex, params, k, sgn](double t) {
      return sgn * k * std::exp(sgn * k * Pex.eval(t, params));
    };
    o.solutions.push_back(std::move(s));
  }
  return o;
}

ExactOracle generator_oracle(const Coefficients& c) {
  require_family(c, {"gen_u_grow", "gen_u_decay", "gen_v_grow", "gen_v_decay"});
  if (!c.exact_seed || !c.phi_expr)
    throw ConstructionError("generator oracle needs the exact Riccati seed");
  ExactOracle o;
  o.family_tag = c.family_tag;
  o.provenance = "solution reproduced from the exact Riccati seed";

  auto phi = *c.phi_expr;
  auto params = c.params;
  auto p = c.p_fn();
  auto q = c.q_fn();
  double sign = c.exact_seed->sign;
  double base = c.t_start;

  AnalyticSolution s;
  if (c.exact_seed->equation == ExactRiccatiSeed::Equation::First) {
    // x = exp(int_base^t u/p), Dx = u x, with u = sign * phi.
    auto expnt = std::make_shared<quad::CachedIntegral>(
        [phi, params, p, sign](double t) { return sign * phi.eval(t, params) / p(t); },
        base, 1e-12);
    s.label = "exp(int u/p) from the exact seed";
    s.x = [expnt](double t) { return std::exp((*expnt)(t)); };
    s.Dx = [expnt, phi, params, sign](double t) {
      return sign * phi.eval(t, params) * std::exp((*expnt)(t));
    };
  } else {
    // x = c v exp(int q v) with v = sign * phi; c = sign keeps x positive.
    // Then Dx = x / v = sign exp(int q v).
    auto expnt = std::make_shared<quad::CachedIntegral>(
        [phi, params, q, sign](double t) { return sign * q(t) * phi.eval(t, params); },
        base, 1e-12);
    s.label = "v exp(int q v) from the exact seed";
    s.x = [expnt, phi, params](double t) {
      return phi.eval(t, params) * std::exp((*expnt)(t));
    };
    s.Dx = [expnt, sign](double t) { return sign * std::exp((*expnt)(t)); };
  }
  o.solutions.push_back(std::move(s));
  return o;
}

void self_validate(const ExactOracle& o, const Coefficients& c, double lo, double hi,
                   double tol) {
  for (const auto& s : o.solutions) {
    double r = max_equation_residual(s, c, lo, hi);
    if (!(r <= tol)) {
      std::ostringstream os;
      os << "oracle '" << s.label << "' fails self-validation: residual " << r
         << " > " << tol;
      throw ConstructionError(os.str());
    }
  }
}

namespace {

// int_t^inf g by doubling windows with geometric extrapolation, for
// integrands that die quickly (companion tails of growing solutions).
double pointwise_tail(const Fn& g, double t, double span_hint) {
  double total = 0.0;
  double a = t;
  double width = std::max(0.25 * (1.0 + std::abs(t)), 1e-3);
  double last = 0.0, prev = 0.0;
  for (int j = 0; j < 64; ++j) {
    double b = a + width;
    prev = last;
    last = quad::integrate(g, a, b, 1e-12);
    total += last;
    a = b;
    width *= 2.0;
    if (std::abs(last) <= 1e-14 * std::abs(total) &&
        std::abs(prev) <= 1e-13 * std::abs(total))
      return total;
    if (a > t + span_hint) break;
  }
  // Geometric leftover from the last two windows.
  if (std::abs(prev) > 0.0 && std::abs(last) < std::abs(prev)) {
    double r = std::abs(last) / std::abs(prev);
    total += last * r / (1.0 - r);
  }
  return total;
}

}  // namespace

AnalyticSolution companion_nonprincipal_analytic(const AnalyticSolution& s,
                                                 const Coefficients& c, double T) {
  auto p = c.p_fn();
  auto x = s.x;
  auto I = std::make_shared<quad::CachedIntegral>(
      [p, x](double t) {
        double xs = x(t);
        return 1.0 / (p(t) * xs * xs);
      },
      T, 1e-12);
  AnalyticSolution out;
  out.label = s.label + " * int 1/(p x^2)";
  out.x = [x, I](double t) { return x(t) * (*I)(t); };
  auto Dx = s.Dx;
  out.Dx = [x, Dx, I](double t) { return Dx(t) * (*I)(t) + 1.0 / x(t); };
  return out;
}

AnalyticSolution companion_principal_analytic(const AnalyticSolution& s,
                                              const Coefficients& c, double span_hint) {
  auto p = c.p_fn();
  auto x = s.x;
  // Once the growing solution overflows, its reciprocal square is zero; the
  // tail windows reach past the comparison span, so map that overflow to 0.
  Fn g = [p, x](double t) -> double {
    try {
      double xs = x(t);
      return 1.0 / (p(t) * xs * xs);
    } catch (const std::exception&) {
      return 0.0;
    }
  };
  AnalyticSolution out;
  out.label = s.label + " * int_t^inf 1/(p x^2)";
  out.x = [x, g, span_hint](double t) { return x(t) * pointwise_tail(g, t, span_hint); };
  auto Dx = s.Dx;
  out.Dx = [x, Dx, g, span_hint](double t) {
    return Dx(t) * pointwise_tail(g, t, span_hint) - 1.0 / x(t);
  };
  return out;
}

VerificationReport compare_to_oracle(const Solution& sol, const AnalyticSolution& oracle,
                                     double lo, double hi, double tol) {
  VerificationReport rep;
  rep.window_lo = lo;
  rep.window_hi = hi;

  const auto& nodes = sol.x.nodes();
  // Normalize at the first node inside the window.
  double c_norm = 0.0;
  bool have_norm = false;
  double dev_x = 0.0, dev_dx = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    double t = nodes[i];
    if (t < lo || t > hi) continue;
    double ox = oracle.x(t);
    if (!have_norm) {
      c_norm = sol.x.value_at(i) / ox;
      have_norm = true;
    }
    dev_x = std::max(dev_x, std::abs(sol.x.value_at(i) / (c_norm * ox) - 1.0));
    double od = c_norm * oracle.Dx(t);
    if (od != 0.0)
      dev_dx = std::max(dev_dx, std::abs(sol.Dx.value_at(i) / od - 1.0));
  }
  if (!have_norm) throw std::invalid_argument("comparison window contains no grid nodes");

  rep.checks.push_back(
      {"x vs " + oracle.label, "relative deviation", dev_x, tol, dev_x <= tol});
  rep.checks.push_back(
      {"Dx vs " + oracle.label, "relative deviation", dev_dx, tol, dev_dx <= tol});
  std::ostringstream os;
  os << "normalization constant " << c_norm;
  rep.notes.push_back(os.str());
  return rep;
}

VerificationReport check_theorem_asymptotics(const std::vector<Solution>& basis,
                                             const classify::EquationClass& ec,
                                             const Coefficients& c,
                                             const classify::ScaleInfo& scale,
                                             const quad::TailConfig& tail0,
                                             double lo, double hi, double band) {
  VerificationReport rep;
  rep.window_lo = lo;
  rep.window_hi = hi;
  auto p = c.p_fn();
  auto q = c.q_fn();

  auto add = [&](const char* name, const char* target, const Fn& f, const Fn& g) {
    auto r = asymptotic_ratio([&](double t) { return std::abs(f(t)); },
                              [&](double t) { return std::abs(g(t)); }, lo, hi, scale.xi,
                              band);
    rep.checks.push_back({name, target, r.limit_estimate, band, r.equivalent});
  };
  auto sign_note = [&](const char* name, const Fn& f) {
    std::ostringstream os;
    os << name << " has sign " << (f(hi) < 0 ? "-" : "+") << " at the window end";
    rep.notes.push_back(os.str());
  };
  auto one = [](double) { return 1.0; };

  quad::TailConfig tail = tail0;
  tail.scale = scale.xi;

  if (ec.c == classify::Case::I) {
    if (basis.size() < 2) throw std::invalid_argument("case I basis needs two solutions");
    const auto& x1 = basis[0];
    const auto& x2 = basis[1];
    tail.horizon = x1.horizon();
    auto rho = quad::tail_grid(q, x1.x.nodes(), tail).g;
    add("x1 -> 1", "x1 ~ 1", [&](double t) { return x1.x(t); }, one);
    add("|Dx1| ~ rho", "Dx1 ~ -rho", [&](double t) { return x1.Dx(t); },
        [&](double t) { return rho(t); });
    sign_note("Dx1", [&](double t) { return x1.Dx(t); });
    add("x2 ~ P", "x2 ~ P", [&](double t) { return x2.x(t); },
        [&](double t) { return scale.P_at(t); });
    add("Dx2 -> 1", "Dx2 ~ 1", [&](double t) { return x2.Dx(t); }, one);
  } else if (ec.c == classify::Case::II) {
    if (basis.size() < 2) throw std::invalid_argument("case II basis needs two solutions");
    const auto& x1 = basis[0];
    const auto& x2 = basis[1];
    tail.horizon = x1.horizon();
    auto pi = quad::tail_grid([p](double s) { return 1.0 / p(s); }, x1.x.nodes(), tail).g;
    double offset = quad::integrate(q, c.t_start, x2.front(), tail.panel_rel_tol);
    auto Q = quad::cumulative_integral(q, x2.front(), x2.x.nodes(), tail.panel_rel_tol)
                 .map([offset](double, double v) { return v + offset; });
    add("x1 ~ pi", "x1 ~ pi", [&](double t) { return x1.x(t); },
        [&](double t) { return pi(t); });
    add("|Dx1| -> 1", "Dx1 ~ -1", [&](double t) { return x1.Dx(t); }, one);
    sign_note("Dx1", [&](double t) { return x1.Dx(t); });
    add("x2 -> 1", "x2 ~ 1", [&](double t) { return x2.x(t); }, one);
    add("Dx2 ~ Q", "Dx2 ~ Q", [&](double t) { return x2.Dx(t); },
        [&](double t) { return Q(t); });
  } else if (ec.c == classify::Case::III) {
    if (basis.size() < 3) throw std::invalid_argument("case III basis needs three solutions");
    const auto& x1 = basis[0];
    const auto& x2 = basis[1];
    const auto& x3 = basis[2];
    tail.horizon = x1.horizon();
    auto pi = quad::tail_grid([p](double s) { return 1.0 / p(s); }, x2.x.nodes(), tail).g;
    auto rho = quad::tail_grid(q, x3.x.nodes(), tail).g;
    add("x1 -> 1", "x1 ~ 1", [&](double t) { return x1.x(t); }, one);
    add("|Dx1| -> 1", "Dx1 ~ 1", [&](double t) { return x1.Dx(t); }, one);
    add("x2 ~ pi", "x2 ~ pi", [&](double t) { return x2.x(t); },
        [&](double t) { return pi(t); });
    add("|Dx2| -> 1", "Dx2 ~ -1", [&](double t) { return x2.Dx(t); }, one);
    sign_note("Dx2", [&](double t) { return x2.Dx(t); });
    add("x3 -> 1", "x3 ~ 1", [&](double t) { return x3.x(t); }, one);
    add("|Dx3| ~ rho", "Dx3 ~ rho up to sign", [&](double t) { return x3.Dx(t); },
        [&](double t) { return rho(t); });
    sign_note("Dx3", [&](double t) { return x3.Dx(t); });
    rep.notes.push_back(
        "magnitude ratios are compared; the quasi-derivative signs of the decreasing "
        "members are negative by construction");
  } else {
    throw std::invalid_argument("no moderate-basis asymptotics for this class");
  }
  return rep;
}

}  // namespace rlab::verify
