#pragma once

// Integral machinery: adaptive Gauss-Kronrod panels, sampled functions with
// interpolation, cumulative integrals, and improper-integral classification
// over a finite horizon with geometric tail extrapolation.
//
// Improper integrals int_t^inf f are judged on windows that double in a
// problem-specific scale variable xi(t) (xi = t by default; the pipelines use
// the cumulative integral of 1/p, or its reciprocal tail, so that windows are
// well proportioned for both power-law and exponential coefficients).

#include <functional>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace rlab::quad {

using Fn = std::function<double(double)>;

struct QuadratureError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Adaptive Gauss-Kronrod 7/15 integration of f over [a, b].
// Throws QuadratureError if f evaluates to a non-finite value, raises, or the
// panel subdivision fails to reach the requested relative tolerance within
// the evaluation budget.
double integrate(const Fn& f, double a, double b, double rel_tol = 1e-10,
                 double* abs_err_out = nullptr, std::size_t max_evals = 4'000'000);

enum class InterpKind { MonotoneCubic, Linear };

// A function sampled on a strictly increasing node set.  Interpolation is
// monotone cubic (Fritsch-Carlson slopes) or linear; interpolated values at
// the nodes equal the stored values exactly.  Not defined beyond the last
// node (the horizon).
class GridFunction {
 public:
  GridFunction() = default;
  GridFunction(std::vector<double> nodes, std::vector<double> values,
               InterpKind interp = InterpKind::MonotoneCubic);

  static GridFunction sample(const Fn& f, std::span<const double> nodes,
                             InterpKind interp = InterpKind::MonotoneCubic);

  double operator()(double t) const;

  const std::vector<double>& nodes() const { return nodes_; }
  const std::vector<double>& values() const { return values_; }
  std::size_t size() const { return nodes_.size(); }
  double front() const { return nodes_.front(); }
  double horizon() const { return nodes_.back(); }
  double value_at(std::size_t i) const { return values_[i]; }
  InterpKind interp() const { return interp_; }

  GridFunction map(const std::function<double(double, double)>& f) const;  // (t, value) -> value

 private:
  std::vector<double> nodes_, values_, slopes_;
  InterpKind interp_ = InterpKind::MonotoneCubic;
};

struct TailConfig {
  double horizon = 1e6;   // right endpoint standing in for infinity (t units)
  double r_conv = 0.75;   // geometric decay threshold for window contributions
  int conv_windows = 3;   // consecutive decaying windows required
  int div_windows = 4;    // consecutive non-decaying windows required
  double divergence_threshold = 1e12;  // |partial sum| beyond which we call it
  double tail_tol = 1e-3;              // geometric tail bound, relative to the sum
  double panel_rel_tol = 1e-10;
  Fn scale;  // xi; strictly increasing and positive from the left endpoint; nullptr -> t
};

struct IntegralVerdict {
  enum class Status { Convergent, Divergent, Inconclusive } status =
      Status::Inconclusive;
  double value = 0.0;           // meaningful when Convergent
  double error_estimate = 0.0;  // >= 0 when Convergent
  std::string note;             // growth note / reason

  bool convergent() const { return status == Status::Convergent; }
  bool divergent() const { return status == Status::Divergent; }
  bool inconclusive() const { return status == Status::Inconclusive; }

  static IntegralVerdict convergent_value(double v, double err);
  static IntegralVerdict divergent(std::string note);
  static IntegralVerdict inconclusive(std::string note);
};

const char* to_string(IntegralVerdict::Status s);

// F(t) = int_a^t f, sampled on `grid` (grid.front() must equal a, F(a) = 0).
GridFunction cumulative_integral(const Fn& f, double a, std::span<const double> grid,
                                 double panel_rel_tol = 1e-10);

// Classify int_t^{inf} f by doubling windows in the scale variable.
IntegralVerdict tail_integral(const Fn& f, double t, const TailConfig& cfg);

// Same with t at the left endpoint.
IntegralVerdict classify_improper(const Fn& f, double a, const TailConfig& cfg);

// Suffix integrals on a grid: g(t_i) = int_{t_i}^{horizon} f + tail estimate
// beyond the horizon (geometric extrapolation from the last windows).
struct TailGridResult {
  GridFunction g;
  double tail_estimate = 0.0;  // contribution beyond the horizon included in g
  double tail_bound = 0.0;     // uncertainty of that contribution
};
TailGridResult tail_grid(const Fn& f, std::span<const double> grid, const TailConfig& cfg);

// Smallest s >= lo with xi(s) >= target, for strictly increasing xi.
double monotone_inverse(const Fn& xi, double target, double lo, double hi_limit);

// First derivative on a nonuniform grid: centered 3-point differences inside,
// one-sided second-order stencils at the ends.
std::vector<double> grid_derivative(const std::vector<double>& nodes,
                                    const std::vector<double>& values);

// Pointwise evaluator for F(t) = int_base^t f with memoized anchor points.
// Not thread safe; give each concurrent pipeline its own instance.
class CachedIntegral {
 public:
  CachedIntegral(Fn f, double base, double rel_tol = 1e-10);
  double operator()(double t) const;

 private:
  Fn f_;
  double base_;
  double rel_tol_;
  mutable std::map<double, double> anchors_;  // t -> F(t)
};

}  // namespace rlab::quad
