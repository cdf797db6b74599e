#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "rlab/classify.hpp"
#include "rlab/coefficients.hpp"
#include "rlab/pipeline.hpp"
#include "rlab/reproduce.hpp"

using namespace rlab;
using namespace rlab::reproduce;
using rlab::expr::Expression;
using rlab::quad::GridFunction;

namespace {

std::vector<double> linspace(double a, double b, std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = a + (b - a) * double(i) / double(n - 1);
  return v;
}

// Constant-coefficient problem q = k^2/p with p = 1 on a short window.
struct ConstFixture {
  Coefficients coeffs;
  quad::TailConfig tail;
  std::vector<double> nodes;
};

ConstFixture const_fixture(double k, double horizon = 30.0, std::size_t n = 4001) {
  ConstFixture f{make_coefficients(Expression::parse("1"),
                                   Expression::constant(k * k), {}, 0.0),
                 {}, linspace(0.0, horizon, n)};
  f.tail.horizon = horizon;
  return f;
}

pipeline::Workspace power_workspace(double k, double lambda, double mu,
                                    pipeline::Settings& s) {
  FamilySpec spec;
  spec.family = "power_log_P";
  spec.p = Expression::parse("1");
  spec.P = Expression::parse("t");
  spec.k = k;
  spec.lambda = lambda;
  spec.mu = mu;
  return pipeline::prepare(make_family(spec), s);
}

}  // namespace

TEST_CASE("constant Riccati functions reproduce pure exponentials") {
  auto f = const_fixture(1.0);
  GridFunction u_pos(f.nodes, std::vector<double>(f.nodes.size(), 1.0));
  GridFunction u_neg(f.nodes, std::vector<double>(f.nodes.size(), -1.0));

  auto xp = reproduce_from_grid(u_pos, riccati::RiccatiEquation::First, f.coeffs,
                                Variant::Cumulative, 1.0, f.tail);
  auto xn = reproduce_from_grid(u_neg, riccati::RiccatiEquation::First, f.coeffs,
                                Variant::Cumulative, 1.0, f.tail);
  CHECK(xp.principal == Solution::Principal::Nonprincipal);
  CHECK(xn.principal == Solution::Principal::Principal);
  for (std::size_t i = 0; i < f.nodes.size(); i += 97) {
    double t = f.nodes[i];
    CHECK(xp.x.value_at(i) == doctest::Approx(std::exp(t)).epsilon(1e-10));
    CHECK(xn.x.value_at(i) == doctest::Approx(std::exp(-t)).epsilon(1e-10));
    CHECK(xp.Dx.value_at(i) == doctest::Approx(std::exp(t)).epsilon(1e-10));
    CHECK(xn.Dx.value_at(i) == doctest::Approx(-std::exp(-t)).epsilon(1e-10));
  }
}

TEST_CASE("the two reproduction routes agree for the constant fixture") {
  // x = e^{k t} from u = k, and (1/k) e^{k t} from v = 1/k: same ray.
  double k = 2.0;
  auto f = const_fixture(k, 12.0, 2001);
  GridFunction u(f.nodes, std::vector<double>(f.nodes.size(), k));
  GridFunction v(f.nodes, std::vector<double>(f.nodes.size(), 1.0 / k));
  auto xu = reproduce_from_grid(u, riccati::RiccatiEquation::First, f.coeffs,
                                Variant::Cumulative, 1.0, f.tail);
  auto xv = reproduce_from_grid(v, riccati::RiccatiEquation::Second, f.coeffs,
                                Variant::Cumulative, 1.0, f.tail);
  double ratio0 = xv.x.value_at(100) / xu.x.value_at(100);
  for (std::size_t i = 0; i < f.nodes.size(); i += 119)
    CHECK(xv.x.value_at(i) / xu.x.value_at(i) == doctest::Approx(ratio0).epsilon(1e-9));
}

TEST_CASE("alternative first-equation formula reproduces the power ray") {
  // q = k/t^2 with k = 1/2: u = alpha1/t gives x ~ t^{alpha1} through
  // x = (1/u) exp(int q/u).
  double k = 0.5;
  double alpha1 = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * k));
  auto coeffs = make_coefficients(Expression::parse("1"),
                                  Expression::parse("0.5/t^2"), {}, 1.0);
  std::vector<double> nodes;
  for (int i = 0; i <= 2000; ++i) nodes.push_back(std::pow(10.0, 3.0 * i / 2000.0));
  std::vector<double> uvals(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) uvals[i] = alpha1 / nodes[i];

  riccati::RiccatiSolution rs;
  rs.equation = riccati::RiccatiEquation::First;
  rs.f = GridFunction(nodes, uvals);
  rs.T = nodes.front();

  quad::TailConfig tail;
  tail.horizon = nodes.back();
  auto sol = reproduce_from_u_alt(rs, coeffs, Variant::Cumulative, 1.0, tail);
  double c0 = sol.x.value_at(500) / std::pow(nodes[500], alpha1);
  for (std::size_t i = 0; i < nodes.size(); i += 111)
    CHECK(sol.x.value_at(i) / std::pow(nodes[i], alpha1) ==
          doctest::Approx(c0).epsilon(1e-6));
}

TEST_CASE("moderate basis from the lambda = 3 family") {
  pipeline::Settings s;
  s.picard.nodes = 1024;
  auto ws = power_workspace(2.0, 3.0, 0.0, s);
  REQUIRE(ws.eqclass.c == classify::Case::I);
  auto outcomes = pipeline::solve_auto(ws, s);
  REQUIRE(outcomes.size() == 2);
  REQUIRE(outcomes[0].ok());
  REQUIRE(outcomes[1].ok());
  const auto& x1 = *outcomes[0].sol;
  const auto& x2 = *outcomes[1].sol;

  // x1(inf) = 1 with Dx ~ -rho < 0; x2 ~ P with Dx -> 1.
  CHECK(x1.x.value_at(x1.x.size() - 1) == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(x1.principal == Solution::Principal::Principal);
  CHECK(x2.principal == Solution::Principal::Nonprincipal);
  REQUIRE(x1.terminal_estimate.has_value());
  CHECK(x1.terminal_estimate->tag == "I(iii)");
  REQUIRE(x2.terminal_estimate.has_value());
  CHECK(x2.terminal_estimate->tag == "I(i)");

  // x Dx keeps one sign on the grid (monotone regime).
  for (const auto* sp : {&x1, &x2}) {
    double sign0 = sp->x.value_at(1) * sp->Dx.value_at(1) > 0 ? 1.0 : -1.0;
    for (std::size_t i = 1; i < sp->x.size(); ++i)
      CHECK(sign0 * sp->x.value_at(i) * sp->Dx.value_at(i) > 0.0);
  }

  // Round trip: Dx/x recovers the Riccati iterate.
  const auto& u = outcomes[0].ric->f;
  for (std::size_t i = 0; i < u.size(); i += 37) {
    double recovered = x1.Dx.value_at(i) / x1.x.value_at(i);
    CHECK(recovered == doctest::Approx(u.value_at(i)).epsilon(1e-12));
  }

  // Quasi-derivative consistency: p * (numerical x') matches Dx away from the
  // grid ends (second-order differencing on the working grid).
  auto dx = quad::grid_derivative(x2.x.nodes(), x2.x.values());
  for (std::size_t i = 3; i + 3 < x2.x.size(); i += 41) {
    double t = x2.x.nodes()[i];
    CHECK(ws.coeffs.p(t) * dx[i] == doctest::Approx(x2.Dx.value_at(i)).epsilon(1e-5));
  }

  // Principal flag agrees with the reciprocal-square dichotomy.
  quad::TailConfig tail = ws.tail;
  auto g1 = [&](double t) {
    double v = x1.x(t);
    return 1.0 / (ws.coeffs.p(t) * v * v);
  };
  auto g2 = [&](double t) {
    double v = x2.x(t);
    return 1.0 / (ws.coeffs.p(t) * v * v);
  };
  tail.horizon = x1.horizon();
  CHECK(quad::tail_integral(g1, x1.front(), tail).divergent());
  CHECK(quad::tail_integral(g2, x2.front(), tail).convergent());
}

TEST_CASE("extreme pair from the k = 1/2 power family") {
  pipeline::Settings s;
  auto ws = power_workspace(0.5, 2.0, 0.0, s);
  auto outcomes = pipeline::solve_auto(ws, s);
  REQUIRE(outcomes.size() == 2);
  REQUIRE(outcomes[0].role == "decaying");
  REQUIRE(outcomes[1].role == "growing");
  REQUIRE(outcomes[0].ok());
  REQUIRE(outcomes[1].ok());
  REQUIRE(outcomes[0].sol->terminal_estimate.has_value());
  CHECK(outcomes[0].sol->terminal_estimate->tag == "I(iv)");
  REQUIRE(outcomes[1].sol->terminal_estimate.has_value());
  CHECK(outcomes[1].sol->terminal_estimate->tag == "I(ii)");
  CHECK(outcomes[0].sol->principal == Solution::Principal::Principal);
  CHECK(outcomes[1].sol->principal == Solution::Principal::Nonprincipal);
}

TEST_CASE("companion constructions on analytic exponentials") {
  auto f = const_fixture(1.0, 24.0, 3001);
  GridFunction u_neg(f.nodes, std::vector<double>(f.nodes.size(), -1.0));
  auto xn = reproduce_from_grid(u_neg, riccati::RiccatiEquation::First, f.coeffs,
                                Variant::Cumulative, 1.0, f.tail);

  // y = e^{-t} int_0^t e^{2s} ds = sinh(t), with quasi-derivative cosh(t).
  auto y = companion_nonprincipal(xn, f.coeffs, 0.0);
  CHECK(y.principal == Solution::Principal::Nonprincipal);
  for (std::size_t i = 0; i < y.x.size(); i += 101) {
    double t = y.x.nodes()[i];
    CHECK(y.x.value_at(i) == doctest::Approx(std::sinh(t)).epsilon(1e-8));
    CHECK(y.Dx.value_at(i) == doctest::Approx(std::cosh(t)).epsilon(1e-8));
  }

  // Principal companion of e^{t} is e^{-t}/2.
  GridFunction u_pos(f.nodes, std::vector<double>(f.nodes.size(), 1.0));
  auto xp = reproduce_from_grid(u_pos, riccati::RiccatiEquation::First, f.coeffs,
                                Variant::Cumulative, 1.0, f.tail);
  auto z = companion_principal(xp, f.coeffs, f.tail);
  CHECK(z.principal == Solution::Principal::Principal);
  for (std::size_t i = 0; i < z.x.size(); i += 101) {
    double t = z.x.nodes()[i];
    if (t > 0.75 * f.tail.horizon) continue;  // tail-estimate dominated corner
    CHECK(z.x.value_at(i) == doctest::Approx(0.5 * std::exp(-t)).epsilon(1e-6));
  }

  // A principal input has no principal companion.
  CHECK_THROWS_AS(companion_principal(xn, f.coeffs, f.tail), NotApplicableError);
}

TEST_CASE("companion constructions on the power pair") {
  // q = 2/t^2 with exact pair {t^2, 1/t}.
  auto coeffs = make_coefficients(Expression::parse("1"), Expression::parse("2/t^2"),
                                  {}, 1.0);
  std::vector<double> nodes;
  for (int i = 0; i <= 3000; ++i) nodes.push_back(std::pow(10.0, 4.0 * i / 3000.0));
  quad::TailConfig tail;
  tail.horizon = nodes.back();

  std::vector<double> xinv(nodes.size()), dinv(nodes.size());
  std::vector<double> xsq(nodes.size()), dsq(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    xinv[i] = 1.0 / nodes[i];
    dinv[i] = -1.0 / (nodes[i] * nodes[i]);
    xsq[i] = nodes[i] * nodes[i];
    dsq[i] = 2.0 * nodes[i];
  }
  Solution s_inv;
  s_inv.x = GridFunction(nodes, xinv);
  s_inv.Dx = GridFunction(nodes, dinv);
  Solution s_sq;
  s_sq.x = GridFunction(nodes, xsq);
  s_sq.Dx = GridFunction(nodes, dsq);

  // x = 1/t, T = 1: y = (t^3 - 1)/(3t) ~ t^2/3.
  auto y = companion_nonprincipal(s_inv, coeffs, 1.0);
  for (std::size_t i = 0; i < y.x.size(); i += 173) {
    double t = y.x.nodes()[i];
    double expect = (t * t * t - 1.0) / (3.0 * t);
    CHECK(y.x.value_at(i) == doctest::Approx(expect).epsilon(1e-7));
  }

  // x = t^2: principal companion 1/(3t).
  auto z = companion_principal(s_sq, coeffs, tail);
  for (std::size_t i = 0; i < z.x.size(); i += 173) {
    double t = z.x.nodes()[i];
    if (t > tail.horizon / 8.0) continue;
    CHECK(z.x.value_at(i) == doctest::Approx(1.0 / (3.0 * t)).epsilon(1e-6));
  }
}

TEST_CASE("terminal-state estimation on synthetic growth") {
  // sinh-like growth on a doubly divergent problem reads as both limits
  // infinite.
  auto f = const_fixture(1.0, 24.0, 1501);
  GridFunction u(f.nodes, std::vector<double>(f.nodes.size(), 1.0));
  auto x = reproduce_from_grid(u, riccati::RiccatiEquation::First, f.coeffs,
                               Variant::Cumulative, 1.0, f.tail);
  auto est = estimate_terminal_state(x, classify::Case::Both,
                                     [](double t) { return t + 1.0; });
  REQUIRE(est.has_value());
  CHECK(est->tag == "I(ii)");
}

TEST_CASE("variant mismatch is rejected") {
  auto f = const_fixture(1.0, 24.0, 801);
  GridFunction u(f.nodes, std::vector<double>(f.nodes.size(), 1.0));
  CHECK_THROWS_AS(reproduce_from_grid(u, riccati::RiccatiEquation::First, f.coeffs,
                                      Variant::Tail, 1.0, f.tail),
                  ReproduceError);
}

TEST_CASE("exponential second-equation variant agrees with the direct one") {
  // x = exp(int 1/(p v)) and x = v exp(int q v) reproduce the same ray when
  // v is the constant exact solution 1/k.
  double k = 1.5;
  auto f = const_fixture(k, 10.0, 1501);
  quad::GridFunction v(f.nodes, std::vector<double>(f.nodes.size(), 1.0 / k));
  riccati::RiccatiSolution rs;
  rs.equation = riccati::RiccatiEquation::Second;
  rs.f = v;
  rs.T = f.nodes.front();
  auto x_exp = reproduce_from_v_exp(rs, f.coeffs, Variant::Cumulative, 1.0, f.tail);
  auto x_dir = reproduce_from_v(rs, f.coeffs, Variant::Cumulative, 1.0, f.tail);
  double ratio0 = x_dir.x.value_at(50) / x_exp.x.value_at(50);
  for (std::size_t i = 0; i < f.nodes.size(); i += 67) {
    CHECK(x_exp.x.value_at(i) == doctest::Approx(std::exp(k * f.nodes[i])).epsilon(1e-9));
    CHECK(x_dir.x.value_at(i) / x_exp.x.value_at(i) == doctest::Approx(ratio0).epsilon(1e-9));
    CHECK(x_exp.Dx.value_at(i) == doctest::Approx(k * std::exp(k * f.nodes[i])).epsilon(1e-9));
  }
}
