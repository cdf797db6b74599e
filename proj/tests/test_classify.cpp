#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "rlab/classify.hpp"
#include "rlab/coefficients.hpp"

using namespace rlab;
using namespace rlab::classify;
using rlab::expr::Expression;

namespace {

Coefficients power_family(double k, double lambda, double mu) {
  FamilySpec s;
  s.family = "power_log_P";
  s.p = Expression::parse("1");
  s.P = Expression::parse("t");
  s.k = k;
  s.lambda = lambda;
  s.mu = mu;
  return make_family(s);
}

ClassifyConfig default_cfg() { return ClassifyConfig{}; }

}  // namespace

TEST_CASE("case split on the four reference fixtures") {
  ClassifyConfig cfg = default_cfg();

  // p = 1, q = 1/t^3 from 1: I_p diverges, I_q converges.
  auto c1 = make_coefficients(Expression::parse("1"), Expression::parse("1/t^3"), {}, 1.0);
  auto e1 = classify_equation(c1, cfg);
  CHECK(e1.c == Case::I);

  // p = e^t, q = 1: I_p converges, I_q diverges.
  auto c2 = make_coefficients(Expression::parse("exp(t)"), Expression::parse("1"), {}, 0.0);
  auto e2 = classify_equation(c2, cfg);
  CHECK(e2.ip.convergent());
  CHECK(std::abs(e2.ip.value - 1.0) <= std::max(e2.ip.error_estimate, 1e-9));
  CHECK(e2.c == Case::II);

  // p = q = 1: both diverge.
  auto c3 = make_coefficients(Expression::parse("1"), Expression::parse("1"), {}, 0.0);
  CHECK(classify_equation(c3, cfg).c == Case::Both);

  // p = e^t, q = e^{-2t}: both converge.
  auto c4 = make_coefficients(Expression::parse("exp(t)"), Expression::parse("exp(-2*t)"),
                              {}, 0.0);
  CHECK(classify_equation(c4, cfg).c == Case::III);
}

TEST_CASE("classification is stable under horizon doubling") {
  for (int doubled = 0; doubled < 2; ++doubled) {
    ClassifyConfig cfg = default_cfg();
    cfg.horizon_scale = doubled ? 2e6 : 1e6;
    cfg.p_probe_horizon = doubled ? 2e6 : 1e6;
    auto c1 = make_coefficients(Expression::parse("1"), Expression::parse("1/t^3"), {}, 1.0);
    CHECK(classify_equation(c1, cfg).c == Case::I);
    auto c2 = make_coefficients(Expression::parse("exp(t)"), Expression::parse("1"), {}, 0.0);
    CHECK(classify_equation(c2, cfg).c == Case::II);
    auto c3 = make_coefficients(Expression::parse("1"), Expression::parse("1"), {}, 0.0);
    CHECK(classify_equation(c3, cfg).c == Case::Both);
    auto c4 = make_coefficients(Expression::parse("exp(t)"),
                                Expression::parse("exp(-2*t)"), {}, 0.0);
    CHECK(classify_equation(c4, cfg).c == Case::III);
  }
}

TEST_CASE("power-family I_q region: lambda > 1 converges") {
  ClassifyConfig cfg = default_cfg();
  auto c = power_family(2.0, 3.0, 0.0);
  auto ec = classify_equation(c, cfg);
  CHECK(ec.c == Case::I);

  // lambda = 2, mu = 0 on the pi-based family: I_q diverges.
  FamilySpec s;
  s.family = "power_log_pi";
  s.p = Expression::parse("exp(t)");
  s.pi = Expression::parse("exp(-t)");
  s.k = 1.0;
  s.lambda = 2.0;
  s.mu = 0.0;
  auto cpi = make_family(s);
  auto epi = classify_equation(cpi, cfg);
  CHECK(epi.c == Case::II);
}

TEST_CASE("terminal state menus per case") {
  ClassifyConfig cfg = default_cfg();

  // Case I, moderate region (lambda = 3): menu is the moderate pair.
  auto cmod = power_family(2.0, 3.0, 0.0);
  auto scale = make_scale(cmod, cfg);
  auto ec = classify_equation(cmod, cfg, scale);
  auto crit = extremity_conditions(cmod, ec, scale, cfg);
  CHECK(crit.moderate_criterion.convergent());
  auto menu = terminal_state_menu(ec, crit);
  REQUIRE(menu.menu.size() == 2);
  CHECK(menu.menu[0].tag == "I(i)");
  CHECK(menu.menu[1].tag == "I(iii)");
  CHECK(!menu.unresolved);
  for (const auto& m : menu.menu) CHECK(m.flavor == Flavor::Moderate);

  // Case I, extreme region (lambda = 2, mu = 0): the extreme pair.
  auto cext = power_family(0.5, 2.0, 0.0);
  auto scale2 = make_scale(cext, cfg);
  auto ec2 = classify_equation(cext, cfg, scale2);
  auto crit2 = extremity_conditions(cext, ec2, scale2, cfg);
  CHECK(crit2.moderate_criterion.divergent());
  auto menu2 = terminal_state_menu(ec2, crit2);
  REQUIRE(menu2.menu.size() == 2);
  CHECK(menu2.menu[0].tag == "I(ii)");
  CHECK(menu2.menu[1].tag == "I(iv)");
  for (const auto& m : menu2.menu) CHECK(m.flavor == Flavor::Extreme);

  // Case III: all three moderate types, always.
  auto c4 = make_coefficients(Expression::parse("exp(t)"), Expression::parse("exp(-2*t)"),
                              {}, 0.0);
  auto ec4 = classify_equation(c4, cfg);
  auto menu4 = terminal_state_menu(ec4, CriteriaReport{});
  REQUIRE(menu4.menu.size() == 3);
  for (const auto& m : menu4.menu) CHECK(m.flavor == Flavor::Moderate);

  // Both divergent: extreme pair only.
  auto c3 = make_coefficients(Expression::parse("1"), Expression::parse("1"), {}, 0.0);
  auto ec3 = classify_equation(c3, cfg);
  auto menu3 = terminal_state_menu(ec3, CriteriaReport{});
  REQUIRE(menu3.menu.size() == 2);
  CHECK(menu3.menu[0].tag == "I(ii)");
  CHECK(menu3.menu[1].tag == "I(iv)");
}

TEST_CASE("menus are single-flavored except case III") {
  for (const auto& t : terminal_state_table()) {
    bool extreme_tag = t.tag == "I(ii)" || t.tag == "I(iv)" || t.tag == "II(ii)" ||
                       t.tag == "II(iv)";
    CHECK((t.flavor == Flavor::Extreme) == extreme_tag);
  }
}

TEST_CASE("extremity ratios on the power family, lambda = 2, mu = 0") {
  ClassifyConfig cfg = default_cfg();
  auto c = power_family(0.5, 2.0, 0.0);
  auto scale = make_scale(c, cfg);
  auto ec = classify_equation(c, cfg, scale);
  REQUIRE(ec.c == Case::I);
  auto crit = extremity_conditions(c, ec, scale, cfg);

  // Both defining ratios tend to k = 1/2.
  REQUIRE(crit.gamma_v_grow.has_value());
  REQUIRE(crit.delta_u_decay.has_value());
  CHECK(*crit.gamma_v_grow == doctest::Approx(0.5).epsilon(0.02));
  CHECK(*crit.delta_u_decay == doctest::Approx(0.5).epsilon(0.02));
  CHECK(crit.equivalence_crosscheck != CriteriaReport::CrossCheck::Fail);
}

TEST_CASE("extremity ratios scale linearly in k") {
  ClassifyConfig cfg = default_cfg();
  auto run = [&](double k) {
    auto c = power_family(k, 2.0, 0.0);
    auto scale = make_scale(c, cfg);
    auto ec = classify_equation(c, cfg, scale);
    return *extremity_conditions(c, ec, scale, cfg).gamma_v_grow;
  };
  double g1 = run(0.5), g2 = run(1.0), g4 = run(2.0);
  CHECK(g2 == doctest::Approx(2.0 * g1).epsilon(0.01));
  CHECK(g4 == doctest::Approx(4.0 * g1).epsilon(0.01));
}

TEST_CASE("logarithmic damping shrinks the growth ratio") {
  ClassifyConfig cfg = default_cfg();
  auto c = power_family(0.5, 2.0, 0.5);
  auto scale = make_scale(c, cfg);
  auto ec = classify_equation(c, cfg, scale);
  auto g_near = *extremity_conditions(c, ec, scale, cfg).gamma_v_grow;
  cfg.probe_window_scale = 1e4;  // push the window outward: the sup decays
  auto g_far = *extremity_conditions(c, ec, scale, cfg).gamma_v_grow;
  CHECK(g_near < 0.5);
  // The sup decays like k/sqrt(log): roughly 0.33 at window start 10 and
  // 0.17 at window start 1e4 (up to O(1/log) corrections).
  CHECK(g_near > 0.25);
  CHECK(g_near < 0.45);
  CHECK(g_far > 0.14);
  CHECK(g_far < 0.22);
  CHECK(g_far < 0.65 * g_near);
}

TEST_CASE("equivalence cross-check on the case II family") {
  ClassifyConfig cfg = default_cfg();
  FamilySpec s;
  s.family = "power_log_pi";
  s.p = Expression::parse("exp(t)");
  s.pi = Expression::parse("exp(-t)");
  s.k = 1.0;
  s.lambda = 1.5;
  s.mu = 0.0;
  auto c = make_family(s);
  auto scale = make_scale(c, cfg);
  auto ec = classify_equation(c, cfg, scale);
  REQUIRE(ec.c == Case::II);
  auto crit = extremity_conditions(c, ec, scale, cfg);
  CHECK(crit.moderate_criterion.convergent());
  CHECK(crit.equivalence_crosscheck == CriteriaReport::CrossCheck::Pass);
  auto menu = terminal_state_menu(ec, crit);
  REQUIRE(menu.menu.size() == 2);
  CHECK(menu.menu[0].tag == "II(i)");
  CHECK(menu.menu[1].tag == "II(iii)");
}

TEST_CASE("inconclusive tails propagate to an unknown class") {
  ClassifyConfig cfg = default_cfg();
  auto c = make_coefficients(Expression::parse("1"),
                             Expression::parse("1/(t*log(t)^1.5)"), {}, std::exp(1.0));
  auto ec = classify_equation(c, cfg);
  CHECK(ec.iq.inconclusive());
  CHECK(ec.c == Case::Unknown);
  CHECK_THROWS_AS(terminal_state_menu(ec, CriteriaReport{}), std::invalid_argument);
}

TEST_CASE("limit pattern lookup honors the case") {
  auto t1 = terminal_state_from_limits(Case::I, LimitKind::FiniteNonzero, LimitKind::Zero);
  REQUIRE(t1.has_value());
  CHECK(t1->tag == "I(iii)");
  auto t2 = terminal_state_from_limits(Case::Both, LimitKind::Infinite, LimitKind::Infinite);
  REQUIRE(t2.has_value());
  CHECK(t2->tag == "I(ii)");
  CHECK(!terminal_state_from_limits(Case::III, LimitKind::Infinite, LimitKind::Infinite)
             .has_value());
}
