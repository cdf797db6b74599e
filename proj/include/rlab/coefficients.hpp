#pragma once

// Problem coefficients (p, q) for (p x')' = q x on [a, inf), with p, q > 0,
// plus the built-in parametric families.
//
// Families (parameters bound at construction so one parsed p serves a sweep):
//   power_log_P   q = k / (p * P^lambda * (log P)^mu),  P = int_a^t ds/p
//                 (needs the closed form of P; analysis starts where P = e)
//   power_log_pi  q = (k/p) * (1/pi)^lambda * (log(1/pi))^mu,
//                 pi = int_t^inf ds/p (needs the closed form of pi; analysis
//                 starts where pi = 1/e)
//   constant_q    q = k^2 / p  (the first Riccati equation has the exact
//                 constant solutions u = +/- k)
//   gen_u_grow    q = phi^2/p + phi'   (phi > 0 increasing, phi(inf) = inf);
//                 u = phi solves the first Riccati equation exactly
//   gen_u_decay   q = Phi^2/p - Phi'   (Phi > 0 decreasing to 0);
//                 u = -Phi solves the first Riccati equation exactly
//   gen_v_grow    q = (1/phi^2) * (1/p - phi')  (phi > 0 decreasing to 0);
//                 v = phi solves the second Riccati equation exactly
//   gen_v_decay   q = (1/Phi^2) * (1/p + Phi')  (Phi > 0 increasing to inf);
//                 v = -Phi solves the second Riccati equation exactly

#include <map>
#include <optional>
#include <stdexcept>
#include <string>

#include "rlab/expr.hpp"
#include "rlab/quadrature.hpp"

namespace rlab {

struct ConstructionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Which Riccati equation a generator family solves exactly, and with which sign.
struct ExactRiccatiSeed {
  enum class Equation { First, Second } equation;
  double sign;  // the exact solution is sign * phi(t)
};

// Immutable after construction; safe to share and evaluate concurrently.
struct Coefficients {
  expr::Expression p_expr, q_expr;
  expr::ParamMap params;
  double a = 0.0;        // base point of P(t) = int_a^t ds/p
  double t_start = 0.0;  // analysis start (>= a); q must be evaluable from here
  std::string family_tag;

  // Closed forms supplied by families; validated against p at construction.
  std::optional<expr::Expression> P_expr;   // primitive of 1/p with P(a) = 0
  std::optional<expr::Expression> pi_expr;  // tail integral of 1/p

  // Generator families: the function whose (signed) value solves a Riccati
  // equation exactly, with its derivative.
  std::optional<expr::Expression> phi_expr, phi_prime_expr;
  std::optional<ExactRiccatiSeed> exact_seed;

  double p(double t) const { return p_expr.eval(t, params); }
  double q(double t) const { return q_expr.eval(t, params); }
  quad::Fn p_fn() const;
  quad::Fn q_fn() const;
  double param(const std::string& name) const;
  bool has_closed_P() const { return P_expr.has_value(); }
  double P_closed(double t) const { return P_expr->eval(t, params); }
  double pi_closed(double t) const { return pi_expr->eval(t, params); }
};

// Inline coefficients from expressions; probes p > 0 and q > 0 on a dense
// grid from t_start and throws ConstructionError on a violation.
Coefficients make_coefficients(expr::Expression p, expr::Expression q,
                               expr::ParamMap params = {}, double a = 0.0,
                               std::optional<double> t_start = std::nullopt);

struct FamilySpec {
  std::string family;
  expr::Expression p;                      // p-spec (positive)
  std::optional<expr::Expression> P;       // closed-form P for power_log_P
  std::optional<expr::Expression> pi;      // closed-form pi for power_log_pi
  std::optional<expr::Expression> phi;     // generator function
  std::optional<expr::Expression> phi_prime;
  double k = 1.0;
  double lambda = 2.0;
  double mu = 0.0;
  double a = 0.0;
};

Coefficients make_family(const FamilySpec& spec);

}  // namespace rlab
