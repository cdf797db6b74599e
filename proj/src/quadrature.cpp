#include "rlab/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace rlab::quad {

namespace {

// Gauss-Kronrod 7/15 abscissae and weights on [-1, 1].
constexpr double kXgk[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769,
    0.741531185599394, 0.586087235467691, 0.405845151377397,
    0.207784955007898, 0.000000000000000};
constexpr double kWgk[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728};
// 7-point Gauss weights, matching the even-indexed Kronrod abscissae.
constexpr double kWg[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469};

struct Panel {
  double value;
  double error;
};

Panel gk15(const Fn& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);

  auto eval = [&](double x) {
    double y = f(x);
    if (!std::isfinite(y)) {
      std::ostringstream os;
      os << "integrand not finite at t = " << x;
      throw QuadratureError(os.str());
    }
    return y;
  };

  double fc = eval(c);
  double kron = kWgk[7] * fc;
  double gauss = kWg[3] * fc;
  for (int i = 0; i < 7; ++i) {
    double dx = h * kXgk[i];
    double y = eval(c - dx) + eval(c + dx);
    kron += kWgk[i] * y;
    if (i % 2 == 1) gauss += kWg[i / 2] * y;
  }
  kron *= h;
  gauss *= h;
  return {kron, std::abs(kron - gauss)};
}

}  // namespace

double integrate(const Fn& f, double a, double b, double rel_tol, double* abs_err_out,
                 std::size_t max_evals) {
  if (a == b) {
    if (abs_err_out) *abs_err_out = 0.0;
    return 0.0;
  }
  double sign = 1.0;
  if (a > b) {
    std::swap(a, b);
    sign = -1.0;
  }

  Panel first = gk15(f, a, b);
  double tol_abs = std::max(rel_tol * std::abs(first.value), 1e-305);

  double sum = 0.0, err = 0.0;
  // Depth-first bisection; each half inherits half the absolute budget.
  struct Item {
    double a, b, tol;
    Panel p;
    int depth;
  };
  std::vector<Item> stack;
  stack.push_back({a, b, tol_abs, first, 0});
  std::size_t evals = 0;
  while (!stack.empty()) {
    Item it = stack.back();
    stack.pop_back();
    // A panel whose error sits at the roundoff floor of its own value cannot
    // be improved by subdividing; accepting it keeps the total well below any
    // achievable relative tolerance.
    if (it.p.error <= it.tol || it.p.error <= 1e-13 * std::abs(it.p.value) ||
        it.depth >= 52 || (it.b - it.a) < 1e-14 * (std::abs(it.a) + 1.0)) {
      sum += it.p.value;
      err += it.p.error;
      continue;
    }
    double mid = 0.5 * (it.a + it.b);
    Panel left = gk15(f, it.a, mid);
    Panel right = gk15(f, mid, it.b);
    evals += 30;
    if (evals > max_evals)
      throw QuadratureError("panel subdivision exceeded the evaluation budget");
    stack.push_back({it.a, mid, 0.5 * it.tol, left, it.depth + 1});
    stack.push_back({mid, it.b, 0.5 * it.tol, right, it.depth + 1});
  }

  if (err > std::max(64.0 * tol_abs, rel_tol * std::abs(sum) * 64.0)) {
    std::ostringstream os;
    os << "quadrature over [" << a << ", " << b << "] did not reach tolerance (err "
       << err << ")";
    throw QuadratureError(os.str());
  }
  if (abs_err_out) *abs_err_out = err;
  return sign * sum;
}

// ---------------------------------------------------------------------------
// GridFunction

GridFunction::GridFunction(std::vector<double> nodes, std::vector<double> values,
                           InterpKind interp)
    : nodes_(std::move(nodes)), values_(std::move(values)), interp_(interp) {
  if (nodes_.size() < 2 || nodes_.size() != values_.size())
    throw std::invalid_argument("GridFunction needs matching node/value lists (>= 2)");
  for (std::size_t i = 0; i + 1 < nodes_.size(); ++i)
    if (!(nodes_[i] < nodes_[i + 1]))
      throw std::invalid_argument("GridFunction nodes must be strictly increasing");
  for (double v : values_)
    if (!std::isfinite(v)) throw std::invalid_argument("GridFunction values must be finite");

  if (interp_ == InterpKind::MonotoneCubic) {
    // Fritsch-Carlson slopes: shape preserving, exact on linear data.
    const std::size_t n = nodes_.size();
    slopes_.assign(n, 0.0);
    std::vector<double> h(n - 1), d(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      h[i] = nodes_[i + 1] - nodes_[i];
      d[i] = (values_[i + 1] - values_[i]) / h[i];
    }
    if (n == 2) {
      slopes_[0] = slopes_[1] = d[0];
    } else {
      for (std::size_t i = 1; i + 1 < n; ++i) {
        if (d[i - 1] * d[i] <= 0.0) {
          slopes_[i] = 0.0;
        } else {
          double w1 = 2.0 * h[i] + h[i - 1];
          double w2 = h[i] + 2.0 * h[i - 1];
          slopes_[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
        }
      }
      auto end_slope = [](double h0, double h1, double d0, double d1) {
        double s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
        if (s * d0 <= 0.0) return 0.0;
        if (d0 * d1 < 0.0 && std::abs(s) > 3.0 * std::abs(d0)) return 3.0 * d0;
        return s;
      };
      slopes_[0] = end_slope(h[0], h[1], d[0], d[1]);
      slopes_[n - 1] = end_slope(h[n - 2], h[n - 3], d[n - 2], d[n - 3]);
    }
  }
}

GridFunction GridFunction::sample(const Fn& f, std::span<const double> nodes,
                                  InterpKind interp) {
  std::vector<double> v(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) v[i] = f(nodes[i]);
  return GridFunction(std::vector<double>(nodes.begin(), nodes.end()), std::move(v), interp);
}

double GridFunction::operator()(double t) const {
  const double lo = nodes_.front(), hi = nodes_.back();
  // Tolerate roundoff at the ends.
  double slack = 1e-12 * (std::abs(t) + 1.0);
  if (t < lo - slack || t > hi + slack) {
    std::ostringstream os;
    os << "grid function evaluated at t = " << t << " outside [" << lo << ", " << hi << "]";
    throw std::domain_error(os.str());
  }
  t = std::clamp(t, lo, hi);

  auto it = std::upper_bound(nodes_.begin(), nodes_.end(), t);
  std::size_t i = (it == nodes_.begin()) ? 0 : static_cast<std::size_t>(it - nodes_.begin()) - 1;
  if (i + 1 >= nodes_.size()) i = nodes_.size() - 2;

  double h = nodes_[i + 1] - nodes_[i];
  double s = (t - nodes_[i]) / h;
  if (t == nodes_[i]) return values_[i];
  if (t == nodes_[i + 1]) return values_[i + 1];

  if (interp_ == InterpKind::Linear)
    return values_[i] + s * (values_[i + 1] - values_[i]);

  // Cubic Hermite on [t_i, t_{i+1}].
  double y0 = values_[i], y1 = values_[i + 1];
  double m0 = slopes_[i] * h, m1 = slopes_[i + 1] * h;
  double s2 = s * s, s3 = s2 * s;
  return (2 * s3 - 3 * s2 + 1) * y0 + (s3 - 2 * s2 + s) * m0 +
         (-2 * s3 + 3 * s2) * y1 + (s3 - s2) * m1;
}

GridFunction GridFunction::map(const std::function<double(double, double)>& f) const {
  std::vector<double> v(values_.size());
  for (std::size_t i = 0; i < values_.size(); ++i) v[i] = f(nodes_[i], values_[i]);
  return GridFunction(nodes_, std::move(v), interp_);
}

// ---------------------------------------------------------------------------
// Improper integrals on doubling windows

IntegralVerdict IntegralVerdict::convergent_value(double v, double err) {
  IntegralVerdict r;
  r.status = Status::Convergent;
  r.value = v;
  r.error_estimate = err;
  return r;
}
IntegralVerdict IntegralVerdict::divergent(std::string note) {
  IntegralVerdict r;
  r.status = Status::Divergent;
  r.note = std::move(note);
  return r;
}
IntegralVerdict IntegralVerdict::inconclusive(std::string note) {
  IntegralVerdict r;
  r.status = Status::Inconclusive;
  r.note = std::move(note);
  return r;
}

const char* to_string(IntegralVerdict::Status s) {
  switch (s) {
    case IntegralVerdict::Status::Convergent: return "convergent";
    case IntegralVerdict::Status::Divergent: return "divergent";
    default: return "inconclusive";
  }
}

double monotone_inverse(const Fn& xi, double target, double lo, double hi_limit) {
  if (xi(lo) >= target) return lo;
  double a = lo;
  double b = std::min(hi_limit, std::max(2.0 * std::abs(lo), lo + 1.0));
  while (xi(b) < target) {
    if (b >= hi_limit) return hi_limit;
    a = b;
    b = std::min(hi_limit, std::max(2.0 * b, b + 1.0));
  }
  for (int i = 0; i < 200 && (b - a) > 1e-14 * (std::abs(b) + 1.0); ++i) {
    double m = 0.5 * (a + b);
    (xi(m) < target ? a : b) = m;
  }
  return 0.5 * (a + b);
}

namespace {

struct WindowScan {
  std::vector<double> w;       // signed window integrals
  std::vector<double> bounds;  // boundaries, bounds[j] .. bounds[j+1] is window j
  double sum = 0.0;
  double quad_err = 0.0;
};

struct TailFit {
  bool geometric = false;
  double est = 0.0;  // geometric extrapolation of the remaining tail
  double unc = 0.0;  // spread of the ratio model
};

// Fit a geometric model to the magnitudes of the last `m` window pairs.
TailFit fit_geometric(const std::vector<double>& w, int m, double r_conv) {
  TailFit fit;
  const int n = static_cast<int>(w.size());
  if (n < m + 1) return fit;
  double r_hi = 0.0, r_lo = std::numeric_limits<double>::infinity();
  bool ok = true;
  for (int j = n - m - 1; j + 1 < n; ++j) {
    double den = std::abs(w[j]);
    if (den == 0.0) {
      ok = ok && std::abs(w[j + 1]) == 0.0;
      continue;
    }
    double r = std::abs(w[j + 1]) / den;
    ok = ok && r <= r_conv;
    r_hi = std::max(r_hi, r);
    r_lo = std::min(r_lo, r);
  }
  if (!ok) return fit;
  fit.geometric = true;
  if (r_hi > 0.0 && std::abs(w[n - 2]) > 0.0) {
    // The last ratio is the best predictor of the continuation; the ratio
    // spread across the fitted windows bounds the model error.
    double r_last = std::abs(w[n - 1]) / std::abs(w[n - 2]);
    fit.est = w.back() * r_last / (1.0 - r_last);
    fit.unc = std::abs(w.back()) * (r_hi / (1.0 - r_hi) - r_lo / (1.0 - r_lo));
  }
  return fit;
}

// Decide a verdict from a complete window scan.
IntegralVerdict judge(const WindowScan& scan, const TailConfig& cfg) {
  const auto& w = scan.w;
  const int n = static_cast<int>(w.size());
  const double slack = 1.0 - 1e-9;

  if (std::abs(scan.sum) > cfg.divergence_threshold)
    return IntegralVerdict::divergent("partial sums exceeded the divergence threshold");

  if (n < cfg.div_windows)
    return IntegralVerdict::inconclusive("too few windows before the horizon");

  std::vector<double> m(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) m[i] = std::abs(w[i]);

  // Dead tail: the integrand contributes nothing near the horizon.
  if (m[n - 1] == 0.0 && m[n - 2] == 0.0)
    return IntegralVerdict::convergent_value(scan.sum, scan.quad_err);

  // Non-decreasing magnitudes over the last div_windows windows.
  {
    bool grows = true;
    for (int j = n - cfg.div_windows; j + 1 < n && grows; ++j)
      grows = m[j + 1] >= m[j] * slack;
    if (grows && m[n - 1] > 0.0)
      return IntegralVerdict::divergent("window contributions non-decreasing");
  }

  // Harmonic-or-slower decay: j*m_j non-decreasing at the horizon means the
  // window sums behave like sum 1/j or worse.
  {
    bool subharmonic = true;
    for (int j = n - cfg.div_windows; j + 1 < n && subharmonic; ++j)
      subharmonic = (j + 2.0) * m[j + 1] >= (j + 1.0) * m[j] * slack;
    if (subharmonic && m[n - 1] > 0.0)
      return IntegralVerdict::divergent("window contributions decay no faster than harmonic");
  }

  // Geometric decay over the last conv_windows windows.
  {
    TailFit fit = fit_geometric(w, cfg.conv_windows, cfg.r_conv);
    if (fit.geometric) {
      double total = scan.sum + fit.est;
      double tail_unc = fit.unc + scan.quad_err;
      if (tail_unc <= cfg.tail_tol * std::max(std::abs(total), 1e-300))
        return IntegralVerdict::convergent_value(total, tail_unc);
      return IntegralVerdict::inconclusive("geometric decay but tail bound above tolerance");
    }
  }

  return IntegralVerdict::inconclusive("window contributions neither geometric nor clearly divergent");
}

WindowScan scan_windows(const Fn& f, double t, const TailConfig& cfg) {
  Fn xi = cfg.scale ? cfg.scale : Fn([](double s) { return s; });
  double x0 = xi(t);
  double xh = xi(cfg.horizon);
  if (!std::isfinite(x0) || !std::isfinite(xh) || !(xh > x0))
    throw QuadratureError("tail integral needs an increasing finite scale up to the horizon");

  // Window j spans [x0 + u(2^j - 1), x0 + u(2^{j+1} - 1)] in the scale
  // variable; for x0 > 0 with u = x0 these are the doubling windows
  // [x0 2^j, x0 2^{j+1}].  Only full windows are used; the stretch between
  // the last full window and the horizon is covered by the tail
  // extrapolation, so clipping never distorts the window ratios.
  double u = (x0 > 0.0) ? x0 : (xh - x0) / 1048576.0;
  if (!(xh >= x0 + 15.0 * u))
    throw QuadratureError("horizon shorter than 4 doubling windows past the start point");

  WindowScan scan;
  scan.bounds.push_back(t);
  double step = u;  // width of the next window in the scale variable
  double x_next = x0 + step;
  while (x_next <= xh * (1.0 + 1e-12)) {
    double prev = scan.bounds.back();
    double next = monotone_inverse(xi, x_next, prev, cfg.horizon);
    if (!(next > prev)) break;
    double err = 0.0;
    double wj = integrate(f, prev, next, cfg.panel_rel_tol, &err);
    scan.w.push_back(wj);
    scan.bounds.push_back(next);
    scan.sum += wj;
    scan.quad_err += err;
    if (std::abs(scan.sum) > cfg.divergence_threshold) break;
    // Stop early once the tail is certified geometric: keeps the scan away
    // from the far end of the probe horizon, where exponential coefficients
    // would overflow without changing the verdict.
    if (static_cast<int>(scan.w.size()) >= cfg.div_windows + 1) {
      TailFit fit = fit_geometric(scan.w, cfg.conv_windows, cfg.r_conv);
      if (fit.geometric &&
          fit.unc + scan.quad_err <=
              cfg.tail_tol * std::max(std::abs(scan.sum + fit.est), 1e-300))
        break;
    }
    step *= 2.0;
    x_next += step;
  }
  return scan;
}

}  // namespace

IntegralVerdict tail_integral(const Fn& f, double t, const TailConfig& cfg) {
  return judge(scan_windows(f, t, cfg), cfg);
}

IntegralVerdict classify_improper(const Fn& f, double a, const TailConfig& cfg) {
  return tail_integral(f, a, cfg);
}

GridFunction cumulative_integral(const Fn& f, double a, std::span<const double> grid,
                                 double panel_rel_tol) {
  if (grid.size() < 2) throw std::invalid_argument("cumulative_integral needs >= 2 nodes");
  if (std::abs(grid.front() - a) > 1e-12 * (std::abs(a) + 1.0))
    throw std::invalid_argument("cumulative_integral grid must start at the base point");
  std::vector<double> vals(grid.size());
  vals[0] = 0.0;
  for (std::size_t i = 1; i < grid.size(); ++i)
    vals[i] = vals[i - 1] + integrate(f, grid[i - 1], grid[i], panel_rel_tol);
  return GridFunction(std::vector<double>(grid.begin(), grid.end()), std::move(vals));
}

TailGridResult tail_grid(const Fn& f, std::span<const double> grid, const TailConfig& cfg) {
  if (grid.size() < 2) throw std::invalid_argument("tail_grid needs >= 2 nodes");
  const double horizon = grid.back();

  // Tail beyond the horizon from the geometric behavior of the last windows
  // (halving in the scale variable, walking back from the horizon).
  Fn xi = cfg.scale ? cfg.scale : Fn([](double s) { return s; });
  double est = 0.0, bound = 0.0;
  {
    const int k_windows = 5;
    std::vector<double> b{horizon};
    double x_end = xi(horizon), x_front = xi(grid.front());
    for (int j = 1; j <= k_windows; ++j) {
      double xt = x_end / std::pow(2.0, j);
      if (xt <= x_front * 1.0000001) break;
      b.push_back(monotone_inverse(xi, xt, grid.front(), horizon));
    }
    std::reverse(b.begin(), b.end());
    if (b.size() >= 3) {
      std::vector<double> w(b.size() - 1);
      for (std::size_t i = 0; i + 1 < b.size(); ++i)
        w[i] = integrate(f, b[i], b[i + 1], cfg.panel_rel_tol);
      TailFit fit = fit_geometric(w, static_cast<int>(w.size()) - 1, 0.95);
      if (fit.geometric) {
        est = fit.est;
        bound = fit.unc + 1e-12 * std::abs(est);
      } else {
        bound = 10.0 * std::abs(w.back());
      }
    }
  }

  std::vector<double> vals(grid.size());
  vals.back() = est;
  for (std::size_t i = grid.size() - 1; i-- > 0;)
    vals[i] = vals[i + 1] + integrate(f, grid[i], grid[i + 1], cfg.panel_rel_tol);
  TailGridResult out;
  out.g = GridFunction(std::vector<double>(grid.begin(), grid.end()), std::move(vals));
  out.tail_estimate = est;
  out.tail_bound = bound;
  return out;
}

std::vector<double> grid_derivative(const std::vector<double>& nodes,
                                    const std::vector<double>& values) {
  const std::size_t n = nodes.size();
  if (n < 3 || values.size() != n)
    throw std::invalid_argument("grid_derivative needs >= 3 matching nodes/values");
  std::vector<double> d(n);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    double h1 = nodes[i] - nodes[i - 1];
    double h2 = nodes[i + 1] - nodes[i];
    d[i] = -h2 / (h1 * (h1 + h2)) * values[i - 1] +
           (h2 - h1) / (h1 * h2) * values[i] +
           h1 / (h2 * (h1 + h2)) * values[i + 1];
  }
  {
    double h1 = nodes[1] - nodes[0], h2 = nodes[2] - nodes[1];
    d[0] = -(2 * h1 + h2) / (h1 * (h1 + h2)) * values[0] +
           (h1 + h2) / (h1 * h2) * values[1] - h1 / (h2 * (h1 + h2)) * values[2];
  }
  {
    double h2 = nodes[n - 1] - nodes[n - 2], h1 = nodes[n - 2] - nodes[n - 3];
    d[n - 1] = (2 * h2 + h1) / (h2 * (h1 + h2)) * values[n - 1] -
               (h1 + h2) / (h1 * h2) * values[n - 2] +
               h2 / (h1 * (h1 + h2)) * values[n - 3];
  }
  return d;
}

CachedIntegral::CachedIntegral(Fn f, double base, double rel_tol)
    : f_(std::move(f)), base_(base), rel_tol_(rel_tol) {
  anchors_.emplace(base_, 0.0);
}

double CachedIntegral::operator()(double t) const {
  auto it = anchors_.lower_bound(t);
  // Nearest anchor (prefer the closer of the two neighbors).
  if (it == anchors_.end()) {
    --it;
  } else if (it != anchors_.begin()) {
    auto lo = std::prev(it);
    if (std::abs(lo->first - t) < std::abs(it->first - t)) it = lo;
  }
  if (it->first == t) return it->second;
  double v = it->second + integrate(f_, it->first, t, rel_tol_);
  anchors_.emplace(t, v);
  return v;
}

}  // namespace rlab::quad
