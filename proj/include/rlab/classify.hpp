#pragma once

// Equation classification for (p x')' = q x:
//  - which of I_p = int dt/p and I_q = int q dt diverge (the case split),
//  - the menu of admissible terminal states (x(inf), Dx(inf)),
//  - the growth-ratio criteria that gate the extreme-solution constructions.

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rlab/coefficients.hpp"
#include "rlab/quadrature.hpp"

namespace rlab::classify {

enum class Case { I, II, III, Both, Unknown };
const char* to_string(Case c);

struct EquationClass {
  quad::IntegralVerdict ip, iq;
  Case c = Case::Unknown;
};

enum class LimitKind { Zero, FiniteNonzero, Infinite };
enum class Flavor { Moderate, Extreme };
const char* to_string(LimitKind k);

// One of the eleven admissible terminal-state patterns.  A state is extreme
// exactly when both limits degenerate together (both zero or both infinite).
struct TerminalStateType {
  std::string tag;  // "I(i)" .. "III(iii)"
  LimitKind x_limit;
  LimitKind dx_limit;
  Flavor flavor;
};

const std::vector<TerminalStateType>& terminal_state_table();
const TerminalStateType* terminal_state_by_tag(const std::string& tag);
// The tag matching measured limits within the given case, if any.
std::optional<TerminalStateType> terminal_state_from_limits(Case c, LimitKind x,
                                                            LimitKind dx);

struct ClassifyConfig {
  quad::TailConfig tail;          // template: horizon fields are overwritten
  double horizon_scale = 1e6;     // horizon where the scale variable reaches this
  double p_probe_horizon = 1e6;   // separate t-horizon for the I_p probe
  std::optional<double> horizon_override;  // absolute t horizon for everything else
  double probe_window_scale = 10.0;        // criteria sup over { xi >= this }
  std::size_t probe_points = 513;
  double applicability_margin = 0.05;  // headroom added to measured gamma/delta
};

// Scale map and horizon shared by everything downstream of classification:
// xi = P when I_p diverges, xi = 1/pi when I_p converges.
struct ScaleInfo {
  quad::IntegralVerdict ip;
  std::shared_ptr<quad::CachedIntegral> P;  // int_{P_base}^t ds/p
  double P_base = 0.0;
  double Ip_total = 0.0;  // meaningful when ip converges
  quad::Fn xi;
  double horizon_t = 0.0;

  double P_at(double t) const { return (*P)(t); }
  double pi_at(double t) const { return Ip_total - (*P)(t); }
};

ScaleInfo make_scale(const Coefficients& c, const ClassifyConfig& cfg);

EquationClass classify_equation(const Coefficients& c, const ClassifyConfig& cfg);
EquationClass classify_equation(const Coefficients& c, const ClassifyConfig& cfg,
                                const ScaleInfo& scale);

// Extreme-construction criteria, estimated as suprema of the defining ratios
// over the probe window.  gamma_* gate the second-Riccati (v) constructions,
// delta_* the first-Riccati (u) ones; _grow/_decay names the solution built.
struct CriteriaReport {
  quad::IntegralVerdict moderate_criterion;  // int qP (case I) or int q pi (case II)
  std::optional<double> gamma_v_grow;   // sup (int_a^t q P^2) / P   (case I)
  std::optional<double> delta_u_decay;  // sup (int_t^inf rho^2/p) / rho (case I)
  std::optional<double> gamma_v_decay;  // sup (int_t^inf q pi^2) / pi  (case II)
  std::optional<double> delta_u_grow;   // sup (int_{t0}^t Q^2/p) / Q   (case II)
  enum class CrossCheck { Pass, Fail, Skipped } equivalence_crosscheck =
      CrossCheck::Skipped;
  double window_lo = 0.0, window_hi = 0.0;
};

CriteriaReport extremity_conditions(const Coefficients& c, const EquationClass& ec,
                                    const ScaleInfo& scale, const ClassifyConfig& cfg);

struct MenuResult {
  std::vector<TerminalStateType> menu;
  bool unresolved = false;  // criterion inconclusive: menu left unfiltered
};

MenuResult terminal_state_menu(const EquationClass& ec, const CriteriaReport& criteria);

// Nodes spaced logarithmically in xi between t_lo and t_hi (first/last exact).
std::vector<double> scale_log_grid(const quad::Fn& xi, double t_lo, double t_hi,
                                   std::size_t n);

}  // namespace rlab::classify
