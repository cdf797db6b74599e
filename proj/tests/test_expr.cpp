#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "rlab/coefficients.hpp"
#include "rlab/expr.hpp"

using rlab::expr::Expression;
using rlab::expr::ParamMap;

TEST_CASE("parsing constants and structure") {
  CHECK(Expression::parse("1").eval(0.0) == 1.0);
  CHECK(Expression::parse("k / (t^2)").eval(2.0, {{"k", 8.0}}) == doctest::Approx(2.0));
  CHECK(Expression::parse("exp(-t) + exp(3*t)").eval(0.5) ==
        doctest::Approx(std::exp(-0.5) + std::exp(1.5)));
}

TEST_CASE("precedence: power binds tighter than unary minus and products") {
  CHECK(Expression::parse("-t^2").eval(3.0) == doctest::Approx(-9.0));
  CHECK(Expression::parse("2*t^2").eval(3.0) == doctest::Approx(18.0));
  CHECK(Expression::parse("2^t^2").eval(2.0) == doctest::Approx(16.0));  // right assoc
  CHECK(Expression::parse("t^-1").eval(4.0) == doctest::Approx(0.25));
  CHECK(Expression::parse("1 - 2 - 3").eval(0.0) == doctest::Approx(-4.0));
  CHECK(Expression::parse("12/3/2").eval(0.0) == doctest::Approx(2.0));
}

TEST_CASE("parse errors carry byte offsets") {
  CHECK_THROWS_AS(Expression::parse("1 + "), rlab::expr::ParseError);
  CHECK_THROWS_AS(Expression::parse("sin(t)"), rlab::expr::ParseError);
  CHECK_THROWS_AS(Expression::parse("(t"), rlab::expr::ParseError);
  try {
    Expression::parse("t + @");
  } catch (const rlab::expr::ParseError& e) {
    CHECK(e.offset == 4);
  }
}

TEST_CASE("evaluation reports domain errors instead of non-finite values") {
  CHECK_THROWS_AS(Expression::parse("log(t)").eval(-1.0), rlab::expr::EvalError);
  CHECK_THROWS_AS(Expression::parse("1/t").eval(0.0), rlab::expr::EvalError);
  CHECK_THROWS_AS(Expression::parse("exp(t)").eval(1e6), rlab::expr::EvalError);
  CHECK_THROWS_AS(Expression::parse("k*t").eval(1.0), rlab::expr::EvalError);  // unbound
}

namespace {

Expression random_tree(std::mt19937& rng, int depth) {
  std::uniform_int_distribution<int> pick(0, depth <= 0 ? 2 : 9);
  std::uniform_real_distribution<double> cval(0.0, 8.0);
  switch (pick(rng)) {
    case 0: return Expression::constant(cval(rng));
    case 1: return Expression::variable();
    case 2: return Expression::parameter(rng() % 2 ? "k" : "mu");
    case 3: return random_tree(rng, depth - 1) + random_tree(rng, depth - 1);
    case 4: return random_tree(rng, depth - 1) - random_tree(rng, depth - 1);
    case 5: return random_tree(rng, depth - 1) * random_tree(rng, depth - 1);
    case 6: return random_tree(rng, depth - 1) / random_tree(rng, depth - 1);
    case 7: return pow(random_tree(rng, depth - 1), random_tree(rng, depth - 1));
    case 8: return -random_tree(rng, depth - 1);
    default:
      return rng() % 2 ? exp(random_tree(rng, depth - 1)) : log(random_tree(rng, depth - 1));
  }
}

}  // namespace

TEST_CASE("round trip: parse(to_string(tree)) is structurally identical") {
  std::mt19937 rng(20240817);
  for (int i = 0; i < 400; ++i) {
    Expression e = random_tree(rng, 4);
    std::string s = e.to_string();
    Expression back = Expression::parse(s);
    CAPTURE(s);
    CHECK(back.structurally_equal(e));
    CHECK(back.to_string() == s);
  }
}

TEST_CASE("power_log_P family q matches the hand-assembled formula") {
  rlab::FamilySpec spec;
  spec.family = "power_log_P";
  spec.p = Expression::parse("1");
  spec.P = Expression::parse("t");
  spec.k = 2.0;
  spec.lambda = 2.5;
  spec.mu = 1.0;
  auto c = rlab::make_family(spec);
  CHECK(c.t_start == doctest::Approx(std::exp(1.0)).epsilon(1e-9));
  for (int i = 0; i < 100; ++i) {
    double t = c.t_start + 0.5 * i + 0.123;
    double expected = 2.0 / (std::pow(t, 2.5) * std::pow(std::log(t), 1.0));
    CHECK(c.q(t) == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("power_log_pi family q matches the hand-assembled formula") {
  rlab::FamilySpec spec;
  spec.family = "power_log_pi";
  spec.p = Expression::parse("exp(t)");
  spec.pi = Expression::parse("exp(-t)");
  spec.k = 1.5;
  spec.lambda = 1.5;
  spec.mu = 0.0;
  auto c = rlab::make_family(spec);
  CHECK(c.t_start == doctest::Approx(1.0).epsilon(1e-9));  // pi = 1/e at t = 1
  for (int i = 0; i < 100; ++i) {
    double t = 1.0 + 0.2 * i;
    double expected = 1.5 * std::exp(-t) * std::exp(1.5 * t);
    CHECK(c.q(t) == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("constant_q family") {
  rlab::FamilySpec spec;
  spec.family = "constant_q";
  spec.p = Expression::parse("1");
  spec.k = 3.0;
  auto c = rlab::make_family(spec);
  CHECK(c.q(7.0) == doctest::Approx(9.0));
}

TEST_CASE("generator families solve their Riccati equation exactly") {
  // q = phi^2/p + phi' with p = exp(-t), phi = exp(t) gives exp(t) + exp(3t).
  rlab::FamilySpec g;
  g.family = "gen_u_grow";
  g.p = Expression::parse("exp(-t)");
  g.phi = Expression::parse("exp(t)");
  g.phi_prime = Expression::parse("exp(t)");
  auto c = rlab::make_family(g);
  for (int i = 0; i <= 20; ++i) {
    double t = 0.1 * i;
    CHECK(c.q(t) == doctest::Approx(std::exp(t) + std::exp(3 * t)).epsilon(1e-12));
    // First Riccati residual of u = phi: u' - q + u^2/p = 0.
    double u = c.phi_expr->eval(t, c.params);
    double du = c.phi_prime_expr->eval(t, c.params);
    double res = du - c.q(t) + u * u / c.p(t);
    CHECK(std::abs(res) <= 1e-8 * (1.0 + std::abs(c.q(t))));
  }

  // q = Phi^2/p - Phi' with p = exp(-3t), Phi = exp(-t) gives exp(-t) + exp(t).
  rlab::FamilySpec d;
  d.family = "gen_u_decay";
  d.p = Expression::parse("exp(-3*t)");
  d.phi = Expression::parse("exp(-t)");
  d.phi_prime = Expression::parse("-exp(-t)");
  auto cd = rlab::make_family(d);
  for (int i = 0; i <= 20; ++i) {
    double t = 0.1 * i;
    CHECK(cd.q(t) == doctest::Approx(std::exp(-t) + std::exp(t)).epsilon(1e-12));
    double u = -cd.phi_expr->eval(t, cd.params);
    double du = cd.phi_prime_expr->eval(t, cd.params);  // derivative of Phi
    double res = -du - cd.q(t) + u * u / cd.p(t);
    CHECK(std::abs(res) <= 1e-8 * (1.0 + std::abs(cd.q(t))));
  }

  // Second-equation generators: v' - 1/p + q v^2 = 0 for v = +/- phi.
  rlab::FamilySpec vg;
  vg.family = "gen_v_grow";
  vg.p = Expression::parse("1");
  vg.phi = Expression::parse("exp(-t)");
  vg.phi_prime = Expression::parse("-exp(-t)");
  auto cv = rlab::make_family(vg);
  for (int i = 0; i <= 20; ++i) {
    double t = 0.1 * i;
    double v = cv.phi_expr->eval(t, cv.params);
    double dv = cv.phi_prime_expr->eval(t, cv.params);
    double res = dv - 1.0 / cv.p(t) + cv.q(t) * v * v;
    CHECK(std::abs(res) <= 1e-8 * (1.0 + std::abs(cv.q(t))));
  }
}

TEST_CASE("construction rejects sign violations") {
  rlab::FamilySpec bad;
  bad.family = "constant_q";
  bad.p = Expression::parse("t - 10");  // changes sign on the probe grid
  bad.k = 1.0;
  bad.a = 0.0;
  CHECK_THROWS_AS(rlab::make_family(bad), rlab::ConstructionError);

  CHECK_THROWS_AS(rlab::make_coefficients(Expression::parse("1"),
                                          Expression::parse("-1"), {}, 0.0),
                  rlab::ConstructionError);
}

TEST_CASE("closed-form P is validated against p") {
  rlab::FamilySpec spec;
  spec.family = "power_log_P";
  spec.p = Expression::parse("1");
  spec.P = Expression::parse("2*t");  // wrong primitive
  spec.k = 1.0;
  spec.lambda = 3.0;
  spec.mu = 0.0;
  CHECK_THROWS_AS(rlab::make_family(spec), rlab::ConstructionError);
}
