#include "rlab/coefficients.hpp"

#include <cmath>
#include <sstream>
#include <vector>

namespace rlab {

using expr::Expression;

namespace {

// Probe offsets above t_start: dense near the start, stretching out far
// enough to catch sign mistakes without overflowing exponential coefficients.
std::vector<double> probe_points(double t_start) {
  std::vector<double> ts;
  double unit = 1.0 + std::abs(t_start);
  for (double g = 1e-6; g <= 64.0; g *= 2.0) ts.push_back(t_start + unit * g);
  for (int i = 1; i <= 32; ++i) ts.push_back(t_start + unit * (i / 32.0));
  return ts;
}

void require_positive(const Expression& e, const expr::ParamMap& params,
                      const std::vector<double>& ts, const char* what) {
  for (double t : ts) {
    double v;
    try {
      v = e.eval(t, params);
    } catch (const expr::EvalError& err) {
      std::ostringstream os;
      os << what << " not evaluable at t = " << t << ": " << err.what();
      throw ConstructionError(os.str());
    }
    if (!(v > 0.0)) {
      std::ostringstream os;
      os << what << " must be positive; got " << v << " at t = " << t;
      throw ConstructionError(os.str());
    }
  }
}

double num_derivative(const Expression& e, const expr::ParamMap& params, double t) {
  double h = 1e-6 * (1.0 + std::abs(t));
  return (e.eval(t + h, params) - e.eval(t - h, params)) / (2.0 * h);
}

void validate_primitive(const Coefficients& c, const Expression& F, double sign,
                        const char* what) {
  // F' must equal sign / p at the probe points.
  for (double t : probe_points(c.t_start)) {
    double lhs = num_derivative(F, c.params, t) * c.p(t);
    if (std::abs(lhs - sign) > 1e-5 * (1.0 + std::abs(lhs))) {
      std::ostringstream os;
      os << what << " is not a primitive of " << (sign > 0 ? "1/p" : "-1/p")
         << " (p*d/dt = " << lhs << " at t = " << t << ")";
      throw ConstructionError(os.str());
    }
  }
}

void validate_phi_pair(const Coefficients& c, double want_sign_of_derivative,
                       const char* what) {
  for (double t : probe_points(c.t_start)) {
    double phi = c.phi_expr->eval(t, c.params);
    double dphi = c.phi_prime_expr->eval(t, c.params);
    if (!(phi > 0.0))
      throw ConstructionError(std::string(what) + " must be positive");
    if (dphi * want_sign_of_derivative <= 0.0)
      throw ConstructionError(std::string(what) + " has the wrong monotonicity");
    double num = num_derivative(*c.phi_expr, c.params, t);
    if (std::abs(num - dphi) > 1e-4 * (1.0 + std::abs(dphi)))
      throw ConstructionError(std::string(what) +
                              ": supplied derivative disagrees with the function");
  }
}

Expression log_power_factor(const Expression& base) {
  // (log base)^mu with mu bound at evaluation time; callers omit the factor
  // structurally when mu == 0.
  return pow(log(base), Expression::parameter("mu"));
}

}  // namespace

quad::Fn Coefficients::p_fn() const {
  return [e = p_expr, pm = params](double t) { return e.eval(t, pm); };
}

quad::Fn Coefficients::q_fn() const {
  return [e = q_expr, pm = params](double t) { return e.eval(t, pm); };
}

double Coefficients::param(const std::string& name) const {
  auto it = params.find(name);
  if (it == params.end())
    throw std::invalid_argument("coefficients carry no parameter '" + name + "'");
  return it->second;
}

Coefficients make_coefficients(Expression p, Expression q, expr::ParamMap params,
                               double a, std::optional<double> t_start) {
  Coefficients c;
  c.p_expr = std::move(p);
  c.q_expr = std::move(q);
  c.params = std::move(params);
  c.a = a;
  c.t_start = t_start.value_or(a);
  if (c.t_start < a) throw ConstructionError("t_start must not precede a");
  auto ts = probe_points(c.t_start);
  require_positive(c.p_expr, c.params, ts, "p");
  require_positive(c.q_expr, c.params, ts, "q");
  return c;
}

Coefficients make_family(const FamilySpec& spec) {
  const Expression t = Expression::variable();
  const Expression k = Expression::parameter("k");
  const Expression lambda = Expression::parameter("lambda");

  Coefficients c;
  c.p_expr = spec.p;
  c.a = spec.a;
  c.t_start = spec.a;
  c.family_tag = spec.family;

  if (spec.family == "power_log_P") {
    if (!spec.P) throw ConstructionError("power_log_P needs the closed form of P");
    if (!(spec.k > 0.0)) throw ConstructionError("power_log_P needs k > 0");
    c.params = {{"k", spec.k}, {"lambda", spec.lambda}, {"mu", spec.mu}};
    c.P_expr = spec.P;
    Expression den = spec.p * pow(*spec.P, lambda);
    if (spec.mu != 0.0) den = den * log_power_factor(*spec.P);
    c.q_expr = k / den;
    // Start where P reaches e so that log P >= 1 on the working interval.
    auto Pfn = [&](double s) { return spec.P->eval(s, c.params); };
    c.t_start = quad::monotone_inverse(Pfn, std::exp(1.0), spec.a, 1e18);
    validate_primitive(c, *spec.P, +1.0, "P");
    if (std::abs(spec.P->eval(spec.a, c.params)) > 1e-9)
      throw ConstructionError("P must vanish at the left endpoint");
  } else if (spec.family == "power_log_pi") {
    if (!spec.pi) throw ConstructionError("power_log_pi needs the closed form of pi");
    if (!(spec.k > 0.0)) throw ConstructionError("power_log_pi needs k > 0");
    c.params = {{"k", spec.k}, {"lambda", spec.lambda}, {"mu", spec.mu}};
    c.pi_expr = spec.pi;
    Expression inv_pi = Expression::constant(1.0) / *spec.pi;
    Expression qe = (k / spec.p) * pow(inv_pi, lambda);
    if (spec.mu != 0.0) qe = qe * log_power_factor(inv_pi);
    c.q_expr = qe;
    // Start where pi falls to 1/e so that log(1/pi) >= 1.
    auto inv_pi_fn = [&](double s) { return 1.0 / spec.pi->eval(s, c.params); };
    c.t_start = quad::monotone_inverse(inv_pi_fn, std::exp(1.0), spec.a, 1e18);
    validate_primitive(c, *spec.pi, -1.0, "pi");
  } else if (spec.family == "constant_q") {
    if (!(spec.k > 0.0)) throw ConstructionError("constant_q needs k > 0");
    c.params = {{"k", spec.k}};
    c.q_expr = k * k / spec.p;
    if (spec.P) {
      c.P_expr = spec.P;
      validate_primitive(c, *spec.P, +1.0, "P");
      if (std::abs(spec.P->eval(spec.a, c.params)) > 1e-9)
        throw ConstructionError("P must vanish at the left endpoint");
    }
  } else if (spec.family == "gen_u_grow" || spec.family == "gen_u_decay" ||
             spec.family == "gen_v_grow" || spec.family == "gen_v_decay") {
    if (!spec.phi || !spec.phi_prime)
      throw ConstructionError(spec.family + " needs phi and its derivative");
    c.phi_expr = spec.phi;
    c.phi_prime_expr = spec.phi_prime;
    const Expression& f = *spec.phi;
    const Expression& df = *spec.phi_prime;
    if (spec.family == "gen_u_grow") {
      c.q_expr = f * f / spec.p + df;
      validate_phi_pair(c, +1.0, "phi");
      c.exact_seed = ExactRiccatiSeed{ExactRiccatiSeed::Equation::First, +1.0};
    } else if (spec.family == "gen_u_decay") {
      c.q_expr = f * f / spec.p - df;
      validate_phi_pair(c, -1.0, "Phi");
      c.exact_seed = ExactRiccatiSeed{ExactRiccatiSeed::Equation::First, -1.0};
    } else if (spec.family == "gen_v_grow") {
      c.q_expr = (Expression::constant(1.0) / spec.p - df) / (f * f);
      validate_phi_pair(c, -1.0, "phi");
      c.exact_seed = ExactRiccatiSeed{ExactRiccatiSeed::Equation::Second, +1.0};
    } else {
      c.q_expr = (Expression::constant(1.0) / spec.p + df) / (f * f);
      validate_phi_pair(c, +1.0, "Phi");
      c.exact_seed = ExactRiccatiSeed{ExactRiccatiSeed::Equation::Second, -1.0};
    }
  } else {
    throw ConstructionError("unknown family '" + spec.family + "'");
  }

  auto ts = probe_points(c.t_start);
  require_positive(c.p_expr, c.params, ts, "p");
  require_positive(c.q_expr, c.params, ts, "q");
  return c;
}

}  // namespace rlab
