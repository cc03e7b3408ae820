#include <doctest.h>

#include <cmath>

#include "fairq/dataset.hpp"
#include "fairq/robust.hpp"
#include "test_util.hpp"

using namespace fairq;

namespace {
constexpr double kPi = 3.141592653589793238462643383279;

AnnularSector make_sector(double r_hat, double theta_hat, double delta, double phi) {
  return AnnularSector{r_hat, theta_hat, delta, phi, false};
}

PolarVec random_point_in(const AnnularSector& s, Rng& rng) {
  const double r = rng.uniform(s.inner_radius(), s.outer_radius());
  const double t = rng.uniform(s.theta_hat - s.phi, s.theta_hat + s.phi);
  return PolarVec{r, t};
}
}  // namespace

TEST_CASE("sector from a zero-radius ball is a point") {
  const auto s = sector_from_ball(PolarVec{1.2, 0.4}, 0.0);
  CHECK(s.delta == 0.0);
  CHECK(s.phi == 0.0);
  CHECK(!s.clamped);
  CHECK(s.contains(PolarVec{1.2, 0.4}));
}

TEST_CASE("sector parameters follow the arcsine rule") {
  const auto s = sector_from_ball(PolarVec{1.6, 0.0}, 0.2);
  CHECK(s.delta == doctest::Approx(0.2));
  CHECK(s.phi == doctest::Approx(std::asin(0.125)).epsilon(1e-12));
}

TEST_CASE("oversized tau clamps the angle and flags it") {
  const auto s = sector_from_ball(PolarVec{0.3, 1.0}, 0.5);
  CHECK(s.phi == doctest::Approx(kPi / 2));
  CHECK(s.clamped);
}

TEST_CASE("the sector contains the ball it was built from") {
  Rng rng(11);
  const PolarVec center{0.9, 0.7};
  const double tau = 0.25;
  const auto s = sector_from_ball(center, tau);
  for (int rep = 0; rep < 10000; ++rep) {
    // rejection-sample the ball
    double dx, dy;
    do {
      dx = rng.uniform(-tau, tau);
      dy = rng.uniform(-tau, tau);
    } while (dx * dx + dy * dy > tau * tau);
    const PolarVec p = PolarVec::from_cartesian(center.x() + dx, center.y() + dy);
    CHECK(s.contains(p, 1e-9));
  }
}

TEST_CASE("three points match the construction") {
  const auto t = three_points(make_sector(1.6, 0.0, 0.2, kPi / 12));
  CHECK(t.b1.r == doctest::Approx(1.8 / std::cos(kPi / 12)).epsilon(1e-12));
  CHECK(t.b1.theta == doctest::Approx(0.0));
  CHECK(t.b2.r == doctest::Approx(1.8));
  CHECK(t.b2.theta == doctest::Approx(kPi / 12));
  CHECK(t.b3.theta == doctest::Approx(-kPi / 12));
  CHECK_THROWS_AS(three_points(make_sector(1.0, 0.0, 0.1, kPi / 2)), RobustError);
}

TEST_CASE("degenerate sector collapses the three points") {
  const auto t = three_points(make_sector(0.8, 0.3, 0.0, 0.0));
  CHECK(t.b1.r == doctest::Approx(0.8));
  CHECK(t.b2.r == doctest::Approx(0.8));
  CHECK(t.b2.theta == doctest::Approx(0.3));
  CHECK(t.b3.theta == doctest::Approx(0.3));
}

TEST_CASE("mirroring the sector swaps the flank points") {
  const auto plus = three_points(make_sector(1.1, 0.4, 0.1, 0.2));
  const auto minus = three_points(make_sector(1.1, -0.4, 0.1, 0.2));
  CHECK(plus.b2.theta == doctest::Approx(-minus.b3.theta));
  CHECK(plus.b3.theta == doctest::Approx(-minus.b2.theta));
}

TEST_CASE("regime split follows the paper parameters") {
  CHECK(regime(make_sector(1.6, 0.0, 0.2, kPi / 12), 0.9) == Regime::Wide);
  CHECK(regime(make_sector(1.6, 0.0, 0.4, kPi / 6), 0.9) == Regime::Narrow);
  CHECK(regime(make_sector(1.6, 0.0, 0.4, 0.0), 1e-9) == Regime::Wide);  // phi = 0 is always wide
}

TEST_CASE("tau(n) formula") {
  JointGaussianSpec spec;
  spec.sigma_xx = SymMatrix::identity(2);
  spec.sigma_xy = {0.0, 0.0};
  spec.sigma_xe = {0.0, 0.0};
  const UncertaintyConfig cfg{0.05, 1.0, 100};
  const double expected = std::log(80.0) / (100.0 * std::sqrt(2.0));
  CHECK(tau_of_n(cfg, spec) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(tau_of_n(cfg, spec) == doctest::Approx(0.030985).epsilon(1e-4));

  const UncertaintyConfig doubled{0.05, 1.0, 200};
  CHECK(tau_of_n(doubled, spec) == doctest::Approx(0.5 * tau_of_n(cfg, spec)).epsilon(1e-12));

  const UncertaintyConfig huge{0.05, 1.0, 100000000};
  CHECK(tau_of_n(huge, spec) < 1e-6);
}

TEST_CASE("degenerate sector reduces both robust solvers to the plain qcqp") {
  Rng rng(21);
  for (int rep = 0; rep < 200; ++rep) {
    const double ry = rng.uniform(0.05, 1.0), ty = rng.uniform(0.0, 2 * kPi);
    const double re = rng.uniform(0.05, 1.0), te = rng.uniform(0.0, 2 * kPi);
    const double eps = rng.uniform(0.005, 0.8);
    const PolarVec byx{ry, ty}, bex{re, te};
    const auto s = make_sector(re, te, 0.0, 0.0);
    const auto plain = solve_closed_form_2d(byx, bex, eps);
    const auto inf = solve_robust_infinite(byx, s, eps);
    const auto three = solve_robust_three(byx, s, eps);
    CHECK(std::abs(inf.objective - plain.objective) < 1e-12);
    CHECK(std::abs(three.objective - plain.objective) < 1e-12);
  }
}

TEST_CASE("wide-regime flat band keeps the unconstrained maximizer") {
  // theta_y well inside [phi+abar, pi-phi-abar]
  const auto s = make_sector(0.5, 0.0, 0.05, 0.1);
  const double eps = 0.2;  // sqrt(eps) = 0.447 > 0.55*sin(0.1) -> wide
  const PolarVec byx{0.8, kPi / 2};
  const auto sol = solve_robust_infinite(byx, s, eps);
  CHECK(sol.case_label == SolveCase::Case2_3);
  CHECK(sol.objective == doctest::Approx(0.64).epsilon(1e-12));
}

TEST_CASE("narrow-regime pinch point from the figure parameters") {
  // eps = 0.9, r_hat = 1.6, delta = 0.4, phi = pi/6, theta_y = 90 deg
  const auto s = make_sector(1.6, 0.0, 0.4, kPi / 6);
  const PolarVec byx{1.0, kPi / 2};
  const auto sol = solve_robust_infinite(byx, s, 0.9);
  CHECK(sol.case_label == SolveCase::Case3_2);
  const double rho = std::sqrt(0.9) / (2.0 * std::sin(kPi / 6));
  CHECK(norm2(sol.a_star) == doctest::Approx(rho).epsilon(1e-12));
  CHECK(rho == doctest::Approx(0.9487).epsilon(1e-4));
}

TEST_CASE("aligned objective vector lands on the flank corner of the three-point set") {
  const auto s = make_sector(1.6, 0.3, 0.2, kPi / 12);
  const double eps = 0.9;
  const PolarVec byx{1.0, 0.3};  // theta_y = theta_hat
  const auto sol = solve_robust_three(byx, s, eps);
  CHECK(sol.case_label == SolveCase::Case4_1);
  const double rho = std::sqrt(eps) / 1.8;
  CHECK(norm2(sol.a_star) == doctest::Approx(rho).epsilon(1e-12));
  CHECK(sol.objective == doctest::Approx(std::pow(rho * std::cos(kPi / 12), 2)).epsilon(1e-12));
}

TEST_CASE("three-point solver matches a grid oracle over its own constraints") {
  Rng rng(22);
  for (int rep = 0; rep < 400; ++rep) {
    const double r_hat = rng.uniform(0.1, 1.2);
    const double delta = rng.uniform(0.0, 0.3);
    const double phi = rng.uniform(0.0, 1.4);
    const double theta_hat = rng.uniform(0.0, 2 * kPi);
    const double eps = rng.uniform(0.01, 1.0);
    const PolarVec byx{rng.uniform(0.05, 1.0), rng.uniform(0.0, 2 * kPi)};
    const auto s = make_sector(r_hat, theta_hat, delta, phi);
    if (s.phi >= kPi / 2 - 1e-6) continue;
    const auto t = three_points(s);
    const auto closed = solve_robust_three(byx, s, eps);
    const auto oracle = solve_multi_constraint_2d(
        byx, {t.b1.cartesian(), t.b2.cartesian(), t.b3.cartesian()}, eps, 6000);
    CHECK(std::abs(closed.objective - oracle.objective) < 1e-4);
    // closed-form optimizer satisfies all three constraints
    for (const auto& b : {t.b1, t.b2, t.b3})
      CHECK(std::pow(dot(closed.a_star, b.cartesian()), 2) <= eps + 1e-9);
  }
}

TEST_CASE("arc form matches the sampled oracle on the arc and the full sector") {
  Rng rng(23);
  int checked = 0;
  for (int rep = 0; rep < 120; ++rep) {
    const auto s = make_sector(rng.uniform(0.2, 1.4), rng.uniform(0.0, 2 * kPi), rng.uniform(0.0, 0.3),
                               rng.uniform(0.0, 1.3));
    const double eps = rng.uniform(0.02, 1.0);
    const PolarVec byx{rng.uniform(0.1, 1.0), rng.uniform(0.0, 2 * kPi)};
    const auto closed = solve_robust_infinite(byx, s, eps);
    const auto arc_oracle = sampled_constraint_oracle(byx, s, eps, 400, 4000, true);
    const auto full_oracle = sampled_constraint_oracle(byx, s, eps, 400, 4000, false);
    CHECK(std::abs(closed.objective - arc_oracle.objective) < 1e-3);
    CHECK(std::abs(closed.objective - full_oracle.objective) < 1e-3);
    ++checked;
  }
  CHECK(checked > 0);
}

TEST_CASE("sampled oracle on a degenerate sector matches the plain oracle") {
  const auto s = make_sector(0.7, 0.5, 0.0, 0.0);
  const PolarVec byx{0.9, 1.4};
  const auto robust = sampled_constraint_oracle(byx, s, 0.05, 100, 4000, true);
  const QcqpInstance inst{CcmVector{{0.9 * std::cos(1.4), 0.9 * std::sin(1.4)}, "yx", false},
                          CcmVector{{0.7 * std::cos(0.5), 0.7 * std::sin(0.5)}, "ex", false}, 0.05};
  const auto plain = brute_force_oracle(inst, 4000);
  CHECK(std::abs(robust.objective - plain.objective) < 1e-9);
}

TEST_CASE("conservativity and strict fairness across random sectors") {
  Rng rng(24);
  for (int rep = 0; rep < 300; ++rep) {
    const auto s = make_sector(rng.uniform(0.1, 1.2), rng.uniform(0.0, 2 * kPi), rng.uniform(0.0, 0.25),
                               rng.uniform(0.0, 1.3));
    const double eps = rng.uniform(0.01, 0.9);
    const PolarVec byx{rng.uniform(0.05, 1.0), rng.uniform(0.0, 2 * kPi)};
    const auto inf = solve_robust_infinite(byx, s, eps);
    const auto three = solve_robust_three(byx, s, eps);
    CHECK(three.objective <= inf.objective + 1e-9);
    for (int draw = 0; draw < 50; ++draw) {
      const PolarVec b = random_point_in(s, rng);
      CHECK(std::pow(dot(inf.a_star, b.cartesian()), 2) <= eps + 1e-9);
      CHECK(std::pow(dot(three.a_star, b.cartesian()), 2) <= eps + 1e-9);
    }
  }
}

TEST_CASE("gap report: no uncertainty means no gap") {
  const PolarVec bex{0.8, 0.4};
  const auto s = make_sector(0.8, 0.4, 0.0, 0.0);
  const auto rep = gap_psi(PolarVec{0.9, 1.1}, bex, s, 0.05);
  CHECK(!rep.outside_sector);
  CHECK(rep.gap == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(std::abs(rep.case_value - rep.gap) < 1e-9);
}

TEST_CASE("gap report: free fairness when the objective is nearly orthogonal") {
  // wide regime, theta_y deep inside the flat band
  const auto s = make_sector(0.5, 0.0, 0.02, 0.05);
  const PolarVec bex{0.49, 0.01};
  const auto rep = gap_psi(PolarVec{0.8, kPi / 2}, bex, s, 0.15);
  CHECK(rep.category == GapCategory::FreeFairness);
  CHECK(rep.case_label == "D");
  CHECK(rep.gap == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("gap report: case C formula") {
  // plain flat, robust in the 4.2 band: gap = 1 - cos(theta_hat+phi+abar-theta_y)
  const double eps = 0.09;
  const auto s = make_sector(0.6, 0.0, 0.05, 0.1);
  const PolarVec bex{0.62, 0.06};
  const double alpha = std::acos(std::sqrt(eps) / bex.r);
  const double abar = std::acos(std::sqrt(eps) / 0.65);
  const double ty = 0.5 * ((alpha + bex.theta) + (0.1 + abar));  // midpoint of the case-C band
  const auto rep = gap_psi(PolarVec{0.7, ty}, bex, s, eps);
  CHECK(rep.case_label == "C");
  CHECK(rep.case_value == doctest::Approx(1.0 - std::cos(0.1 + abar - ty)).epsilon(1e-9));
  CHECK(std::abs(rep.case_value - rep.gap) < 1e-9);
}

TEST_CASE("gap formula matches the solver difference on random instances") {
  Rng rng(25);
  int outside = 0;
  for (int rep_i = 0; rep_i < 1000; ++rep_i) {
    const double r_hat = rng.uniform(0.15, 1.0);
    const double theta_hat = rng.uniform(0.0, 2 * kPi);
    const double delta = rng.uniform(0.0, 0.2);
    const double phi = rng.uniform(0.0, 1.2);
    const auto s = make_sector(r_hat, theta_hat, delta, phi);
    // true b_ex inside the sector, on the theta_e >= theta_hat side
    const PolarVec bex{rng.uniform(s.inner_radius(), s.outer_radius()),
                       theta_hat + rng.uniform(0.0, phi)};
    const PolarVec byx{rng.uniform(0.05, 1.0), rng.uniform(0.0, 2 * kPi)};
    const double eps = rng.uniform(0.01, 0.8);
    const auto rep = gap_psi(byx, bex, s, eps);
    if (rep.outside_sector) ++outside;
    CHECK(std::abs(rep.case_value - rep.gap) < 1e-9);
    CHECK(rep.gap >= -1e-9);
  }
  CHECK(outside == 0);
}

TEST_CASE("gap report flags a point outside the sector") {
  const auto s = make_sector(0.5, 0.0, 0.05, 0.1);
  const auto rep = gap_psi(PolarVec{0.8, 1.0}, PolarVec{0.9, 1.5}, s, 0.05);
  CHECK(rep.outside_sector);
}

TEST_CASE("mirrored instances classify through reflection") {
  Rng rng(26);
  for (int rep_i = 0; rep_i < 300; ++rep_i) {
    const double r_hat = rng.uniform(0.2, 1.0);
    const double theta_hat = rng.uniform(0.0, 2 * kPi);
    const double delta = rng.uniform(0.0, 0.15);
    const double phi = rng.uniform(0.05, 1.0);
    const auto s = make_sector(r_hat, theta_hat, delta, phi);
    const PolarVec bex{rng.uniform(s.inner_radius(), s.outer_radius()),
                       theta_hat - rng.uniform(0.0, phi)};  // mirrored side
    const PolarVec byx{rng.uniform(0.05, 1.0), rng.uniform(0.0, 2 * kPi)};
    const double eps = rng.uniform(0.01, 0.8);
    const auto rep = gap_psi(byx, bex, s, eps);
    CHECK(std::abs(rep.case_value - rep.gap) < 1e-9);
  }
}

TEST_CASE("monotonicity check rejects constant sequences") {
  const auto s = make_sector(0.6, 0.1, 0.1, 0.2);
  CHECK_THROWS_AS(monotonicity_check({s, s, s}, PolarVec{0.8, 1.0}, PolarVec{0.6, 0.1}, 0.05),
                  RobustError);
}

TEST_CASE("shrinking tau sectors give non-decreasing objectives") {
  const auto spec = JointGaussianSpec::from_full(covariance_preset(PresetName::Gen2).matrix);
  const CcmVector byx_v = ccm(spec, "yx");
  const CcmVector bex_v = ccm(spec, "ex");
  const PolarVec byx = PolarVec::from_cartesian(byx_v.entries[0], byx_v.entries[1]);
  const PolarVec bex = PolarVec::from_cartesian(bex_v.entries[0], bex_v.entries[1]);

  std::vector<AnnularSector> sectors;
  for (long long n : {50, 100, 200, 400}) {
    const UncertaintyConfig cfg{0.05, 4.0, n};
    sectors.push_back(sector_from_ball(bex, tau_of_n(cfg, spec)));
  }
  const auto result = monotonicity_check(sectors, byx, bex, 0.075);
  CHECK(result.non_decreasing);
  CHECK(result.plateau_matches_plain);
}

TEST_CASE("free-fairness instances plateau at the plain objective") {
  const auto spec = JointGaussianSpec::from_full(covariance_preset(PresetName::Fair2).matrix);
  const CcmVector byx_v = ccm(spec, "yx");
  const CcmVector bex_v = ccm(spec, "ex");
  const PolarVec byx = PolarVec::from_cartesian(byx_v.entries[0], byx_v.entries[1]);
  const PolarVec bex = PolarVec::from_cartesian(bex_v.entries[0], bex_v.entries[1]);

  std::vector<AnnularSector> sectors;
  for (long long n : {400, 800, 1600, 3200}) {
    const UncertaintyConfig cfg{0.05, 1.0, n};
    sectors.push_back(sector_from_ball(bex, tau_of_n(cfg, spec)));
  }
  const auto result = monotonicity_check(sectors, byx, bex, 0.025);
  CHECK(result.non_decreasing);
  CHECK(result.plateau_matches_plain);
  const auto plain = solve_closed_form_2d(byx, bex, 0.025);
  CHECK(result.objectives.back() == doctest::Approx(plain.objective).epsilon(1e-9));
}
