#pragma once

// Quantitative verification: asymptotic equivalence f ~ g, Wronskian
// constancy, equation residuals, and comparison against exact solutions.
//
// Closed-form references ("oracles") carry x and its quasi-derivative Dx as
// callables; their equation residual |(Dx)' - q x| / |q x| is measured with
// adaptive small-step central differences, so an oracle is validated to near
// machine accuracy before anything is compared against it.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rlab/classify.hpp"
#include "rlab/coefficients.hpp"
#include "rlab/quadrature.hpp"
#include "rlab/reproduce.hpp"

namespace rlab::verify {

struct Check {
  std::string name;
  std::string target;  // what the measured value is compared against
  double measured = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct VerificationReport {
  std::vector<Check> checks;
  std::vector<std::string> notes;
  double window_lo = 0.0, window_hi = 0.0;
  bool all_pass() const;
};

struct RatioResult {
  double limit_estimate = 0.0;
  bool equivalent = false;
  std::vector<double> checkpoints;
};

// Ratio f/g at geometric checkpoints of the scale variable across the window;
// "equivalent" when the last three checkpoints sit within the band around 1
// and the deviation is not growing.
RatioResult asymptotic_ratio(const quad::Fn& f, const quad::Fn& g, double lo, double hi,
                             const quad::Fn& xi, double band = 0.02, int ncheck = 8);

struct WronskianResult {
  double C = 0.0;
  double rel_variation = 0.0;
};

// p (x2 x1' - x1 x2') evaluated as x2 Dx1 - x1 Dx2.  Nodewise when the two
// solutions share a grid, otherwise at checkpoints on the overlap.
WronskianResult wronskian(const reproduce::Solution& x1, const reproduce::Solution& x2);

struct AnalyticSolution {
  std::string label;
  quad::Fn x;
  quad::Fn Dx;
};

WronskianResult wronskian(const AnalyticSolution& x1, const AnalyticSolution& x2,
                          double lo, double hi, int samples = 33);

// |(Dx)' - q x| / max(|q x|, floor) at t, derivative by adaptive central
// differences on the Dx callable.
double equation_residual(const AnalyticSolution& s, const Coefficients& c, double t);
double max_equation_residual(const AnalyticSolution& s, const Coefficients& c, double lo,
                             double hi, int samples = 64);

// Grid flavor: (p x')' by repeated nonuniform differences, weighted by
// max(1, |q x|); dominated by the differencing truncation error.
double max_grid_equation_residual(const reproduce::Solution& s, const Coefficients& c,
                                  double lo, double hi);

struct ExactOracle {
  std::string family_tag;
  std::vector<AnalyticSolution> solutions;
  std::string provenance;
};

// Exact bases for the fixtures that have them.  Throws ConstructionError when
// the coefficients do not match the oracle family.
ExactOracle power_law_oracle(const Coefficients& c);         // q = k/(p P^2): x = P^alpha
ExactOracle power_law_pi_oracle(const Coefficients& c);      // q = k/(p pi^2): x = pi^alpha
ExactOracle constant_coefficient_oracle(const Coefficients& c);  // q = k^2/p: x = e^{+-kP}
ExactOracle generator_oracle(const Coefficients& c);  // x from the exact Riccati seed

// Asserts max equation residual <= tol on [lo, hi] for every oracle solution.
void self_validate(const ExactOracle& o, const Coefficients& c, double lo, double hi,
                   double tol = 1e-8);

// Pointwise companions of an analytic solution (the integral is evaluated by
// quadrature on demand):  y = x int_T^t ds/(p x^2)  or  y = x int_t^inf ...
AnalyticSolution companion_nonprincipal_analytic(const AnalyticSolution& s,
                                                 const Coefficients& c, double T);
AnalyticSolution companion_principal_analytic(const AnalyticSolution& s,
                                              const Coefficients& c, double span_hint);

// Normalizes sol to the oracle at the window's left edge (one multiplicative
// constant) and reports the max relative deviation of x and Dx on the window.
VerificationReport compare_to_oracle(const reproduce::Solution& sol,
                                     const AnalyticSolution& oracle, double lo, double hi,
                                     double tol);

// The moderate-basis asymptotics for the class at hand, all as |.| ratios,
// with measured signs appended as notes.
VerificationReport check_theorem_asymptotics(const std::vector<reproduce::Solution>& basis,
                                             const classify::EquationClass& ec,
                                             const Coefficients& c,
                                             const classify::ScaleInfo& scale,
                                             const quad::TailConfig& tail,
                                             double lo, double hi, double band = 0.02);

}  // namespace rlab::verify
