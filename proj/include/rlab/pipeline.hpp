#pragma once

// End-to-end orchestration: classify the equation, pick the applicable
// operators, run the fixed-point solves, reproduce solutions, and assemble
// verification batteries.  Everything below is deterministic; independent
// workspaces never share mutable state, so sweep cells can run concurrently.

#include <optional>
#include <string>
#include <vector>

#include "rlab/classify.hpp"
#include "rlab/coefficients.hpp"
#include "rlab/reproduce.hpp"
#include "rlab/riccati.hpp"
#include "rlab/verify.hpp"

namespace rlab::pipeline {

struct Settings {
  classify::ClassifyConfig classify;
  riccati::PicardConfig picard;
  double verify_band = 0.02;      // asymptotic-equivalence band
  double oracle_tol = 1e-4;       // solution-vs-oracle deviation
  double window_factor = 2.0;     // comparison window [f*xi(T), xi(H)/f]
  double case3_omega = 1.0;
};

struct Workspace {
  Coefficients coeffs;
  classify::ScaleInfo scale;
  classify::EquationClass eqclass;
  std::optional<classify::CriteriaReport> criteria;  // case I / II only
  std::optional<classify::MenuResult> menu;          // determinate classes only
  quad::TailConfig tail;                             // horizon and scale resolved
};

Workspace prepare(Coefficients coeffs, const Settings& s);

struct SolveOutcome {
  riccati::OperatorSpec spec;
  std::string role;  // "x1", "x2", "x3", "decaying", "growing"
  riccati::ThresholdResult threshold;
  std::optional<riccati::RiccatiSolution> ric;
  std::optional<reproduce::Solution> sol;
  std::string error;  // nonempty when the construction failed

  bool not_applicable() const { return !threshold.applicable; }
  bool ok() const { return sol.has_value(); }
};

SolveOutcome solve_kind(const Workspace& ws, riccati::OperatorSpec spec,
                        const Settings& s, const std::string& role = "");

// The applicability table: moderate pair, case-III triple, or extreme pair
// (ordered principal-first).  Empty for the doubly-divergent class, which has
// no general construction.
std::vector<riccati::OperatorSpec> auto_kinds(const Workspace& ws, const Settings& s);
std::vector<SolveOutcome> solve_auto(const Workspace& ws, const Settings& s);

// Comparison window [factor * xi(T), xi(horizon) / factor], mapped back to t.
std::pair<double, double> comparison_window(const Workspace& ws, double T,
                                            const Settings& s);

// Family-appropriate verification battery (exact oracles where the family has
// them, the moderate-basis asymptotics otherwise).
verify::VerificationReport run_verify_battery(const Workspace& ws, const Settings& s);

// Identity linking two solutions through their Riccati functions:
//   x2/Dx2 - x1/Dx1 = C / (Dx1 Dx2),  C the Wronskian of the pair.
// Returns the max relative deviation over [lo, hi].
double riccati_gap_identity(const verify::AnalyticSolution& x1,
                            const verify::AnalyticSolution& x2, double C, double lo,
                            double hi, int samples = 65);

}  // namespace rlab::pipeline
