#pragma once

// Reconstruction of solutions x of (p x')' = q x from global Riccati
// solutions, via the exponential-integral reproducing formulas
//
//   from u:       x = s exp(int_T^t u/p)    or  x = s exp(-int_t^inf u/p)
//   from u (alt): x = (s/u) exp(int q/u)    with the same two-sided split
//   from v:       x = s v exp(int q v)      (quasi-derivative Dx = x/v)
//   from v (exp): x = s exp(int 1/(p v))
//
// plus the companion constructions
//
//   nonprincipal: y = x int_T^t ds/(p x^2)      (vanishes at T; the grid
//                                                returned starts just past it)
//   principal:    y = x int_t^inf ds/(p x^2)
//
// A solution is principal exactly when int^inf dt/(p x^2) diverges; for the
// reproduced ones that is equivalent to the Riccati function being eventually
// negative (u < 0, or v < 0 for the second equation).

#include <optional>
#include <stdexcept>
#include <string>

#include "rlab/classify.hpp"
#include "rlab/coefficients.hpp"
#include "rlab/quadrature.hpp"
#include "rlab/riccati.hpp"

namespace rlab::reproduce {

enum class Variant { Cumulative, Tail };
const char* to_string(Variant v);

struct ReproduceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NotApplicableError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Solution {
  quad::GridFunction x;
  quad::GridFunction Dx;  // quasi-derivative p x'
  std::string source;     // "from_u(tail)", "companion_principal", ...
  enum class Principal { Principal, Nonprincipal, Undetermined } principal =
      Principal::Undetermined;
  std::optional<classify::TerminalStateType> terminal_estimate;
  double normalization = 1.0;

  double front() const { return x.front(); }
  double horizon() const { return x.horizon(); }
};

const char* to_string(Solution::Principal p);

Solution reproduce_from_u(const riccati::RiccatiSolution& u, const Coefficients& c,
                          Variant variant, double scale, const quad::TailConfig& tail);

Solution reproduce_from_u_alt(const riccati::RiccatiSolution& u, const Coefficients& c,
                              Variant variant, double scale, const quad::TailConfig& tail);

Solution reproduce_from_v(const riccati::RiccatiSolution& v, const Coefficients& c,
                          Variant variant, double scale, const quad::TailConfig& tail);

Solution reproduce_from_v_exp(const riccati::RiccatiSolution& v, const Coefficients& c,
                              Variant variant, double scale, const quad::TailConfig& tail);

// Same formulas applied to a Riccati function supplied directly as a grid
// function (used for exact seeds like constant u).
Solution reproduce_from_grid(const quad::GridFunction& f, riccati::RiccatiEquation eq,
                             const Coefficients& c, Variant variant, double scale,
                             const quad::TailConfig& tail);

Solution companion_nonprincipal(const Solution& x, const Coefficients& c, double T);
Solution companion_principal(const Solution& x, const Coefficients& c,
                             const quad::TailConfig& tail);

struct TrendConfig {
  double band = 0.02;   // |ratio - 1| below this reads as a finite limit
  int checkpoints = 7;  // geometric checkpoints over the last scale decade
};

std::optional<classify::TerminalStateType> estimate_terminal_state(
    const Solution& sol, classify::Case c, const quad::Fn& xi,
    const TrendConfig& cfg = {});

}  // namespace rlab::reproduce
