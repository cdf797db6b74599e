#pragma once

// The integral operators whose fixed points are global solutions of the two
// Riccati equations associated with (p x')' = q x:
//
//   (first)   u' = q - u^2/p      for u = p x'/x
//   (second)  v' = 1/p - q v^2    for v = x/(p x')
//
// Each operator kind carries one update rule, one admissible band, and one
// start-point threshold.  With P, pi, Q, rho the cumulative/tail integrals of
// 1/p and q:
//
//   moderate_u_1   u(t) = -rho(t) + int_t^inf u^2/p        band [-rho, -rho/2]
//                  threshold  int_T^inf rho/p <= 1/4
//   moderate_v_1   v(t) = P(t) - int_T^t q v^2             band [P/2, P]
//                  threshold  int_T^inf q P <= 1/4
//   moderate_v_2   v(t) = -pi(t) + int_t^inf q v^2         band [-pi, -pi/2]
//                  threshold  int_T^inf q pi <= 1/4
//   moderate_u_2   u(t) = Q(t) - int_T^t u^2/p             band [Q/2, Q]
//                  threshold  int_T^inf Q/p <= 1/4
//   case3_u_omega  u(t) = omega - rho(t) + int_t^inf u^2/p band |u-omega| <= omega/2
//                  thresholds rho(T) <= omega/4, pi(T) <= 1/(9 omega)
//   case3_v        v(t) = -pi(t) + int_t^inf q v^2         band [-pi, -pi/2]
//                  threshold  pi(T) rho(T) <= 1/4
//   case3_u_rho    u(t) = -rho(t) + int_t^inf u^2/p        band [-rho, -rho/2]
//                  threshold  pi(T) rho(T) <= 1/4
//   extreme_v_grow   v(t) = P(t) - int q v^2               band [(1-g)P, P]
//                  criterion  sup (int q P^2)/P = g < 1
//   extreme_u_decay  u(t) = -rho(t) + int_t^inf u^2/p      band [-rho, -(1-d)rho]
//                  criterion  sup (int_t^inf rho^2/p)/rho = d < 1
//   extreme_v_decay  v(t) = -pi(t) + int_t^inf q v^2       band [-pi, -(1-g)pi]
//                  criterion  sup (int_t^inf q pi^2)/pi = g < 1
//   extreme_u_grow   u(t) = Q(t) - int u^2/p              band [(1-d)Q, Q]
//                  criterion  sup (int Q^2/p)/Q = d < 1
//
// The moderate_* and case3_* operators are contractions (factor <= 1/2 at the
// selected T); the extreme_* operators carry no contraction guarantee and the
// iteration simply reports its empirical ratios.

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rlab/classify.hpp"
#include "rlab/coefficients.hpp"
#include "rlab/quadrature.hpp"

namespace rlab::riccati {

enum class OperatorKind {
  ModerateU1,
  ModerateV1,
  ModerateV2,
  ModerateU2,
  Case3UOmega,
  Case3V,
  Case3URho,
  ExtremeVGrow,
  ExtremeUDecay,
  ExtremeVDecay,
  ExtremeUGrow,
};

const char* to_string(OperatorKind k);
std::optional<OperatorKind> kind_from_string(const std::string& name);

enum class RiccatiEquation { First, Second };
RiccatiEquation equation_of(OperatorKind k);

// True for operators whose quadratic term accumulates from the left
// (prefix integrals); false for the ones anchored at infinity.
bool is_cumulative(OperatorKind k);
// True for the kinds with a proven contraction factor <= 1/2.
bool is_contraction_kind(OperatorKind k);

struct OperatorSpec {
  OperatorSpec() = default;
  OperatorSpec(OperatorKind k) : kind(k) {}  // intentionally implicit
  OperatorKind kind = OperatorKind::ModerateU1;
  double omega = 1.0;                // case3_u_omega: target ratio Dx/x at infinity
  std::optional<double> band_param;  // extreme kinds: gamma/delta; measured+margin if unset
};

struct SolveError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NotApplicableError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PicardConfig {
  std::size_t nodes = 512;
  double tol = 1e-9;
  int max_iter = 200;
  double threshold_margin = 0.9;  // fixed thresholds must hold with this margin
  double band_headroom = 0.05;    // auto band parameter = measured sup + headroom
};

struct ThresholdResult {
  bool applicable = false;
  double T = 0.0;
  double measured = 0.0;  // best (or total-sup) value of the threshold quantity
  double bound = 0.0;     // what it had to stay below
  std::optional<double> band_param;  // resolved gamma/delta for extreme kinds
  std::string detail;
};

ThresholdResult select_start_T(const Coefficients& c, const classify::ScaleInfo& scale,
                               const OperatorSpec& spec, const PicardConfig& cfg,
                               const quad::TailConfig& tail);

struct RiccatiSolution {
  RiccatiEquation equation;
  quad::GridFunction f;  // u or v on [T, horizon]
  double T = 0.0;
  int iterations = 0;
  double final_delta = 0.0;  // weighted sup norm of the last update (+ tail bound)
  bool in_band = true;
  std::vector<double> contraction_history;  // successive update-norm ratios
  OperatorSpec spec;
  double anchor_correction = 0.0;  // pre-history integral used by cumulative extremes
  quad::GridFunction band_lo, band_hi;
};

RiccatiSolution picard_solve(const Coefficients& c, const classify::ScaleInfo& scale,
                             const OperatorSpec& spec, double T, const PicardConfig& cfg,
                             const quad::TailConfig& tail);

// Pointwise residuals of the two Riccati equations, with the derivative taken
// by centered differences on the (nonuniform) grid and one-sided at the ends.
quad::GridFunction residual_u(const quad::GridFunction& u, const Coefficients& c);
quad::GridFunction residual_v(const quad::GridFunction& v, const Coefficients& c);

}  // namespace rlab::riccati
