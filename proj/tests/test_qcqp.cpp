#include <doctest.h>

#include <cmath>

#include "fairq/qcqp.hpp"
#include "fairq/rng.hpp"
#include "test_util.hpp"

using namespace fairq;

namespace {
constexpr double kPi = 3.141592653589793238462643383279;

CcmVector vec2(double x, double y, const char* pair = "yx") { return CcmVector{{x, y}, pair, false}; }

QcqpInstance polar_instance(double ry, double ty, double re, double te, double eps) {
  return QcqpInstance{vec2(ry * std::cos(ty), ry * std::sin(ty)),
                      vec2(re * std::cos(te), re * std::sin(te), "ex"), eps};
}
}  // namespace

TEST_CASE("orthogonal constraint leaves the maximizer free") {
  const auto sol = solve_closed_form_2d(polar_instance(1.0, 0.0, 1.0, kPi / 2, 0.01));
  CHECK(sol.case_label == SolveCase::Case1_2);
  CHECK(sol.objective == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(sol.constraint_value < 1e-20);
  CHECK(sol.a_star[0] == doctest::Approx(1.0));
}

TEST_CASE("binding case follows the closed form") {
  // re = 1.5, theta_e = 0, ry = 1, theta_y = 30 deg, eps = 0.9
  const double eps = 0.9;
  const auto sol = solve_closed_form_2d(polar_instance(1.0, kPi / 6, 1.5, 0.0, eps));
  const double alpha = std::acos(std::sqrt(eps) / 1.5);
  CHECK(sol.case_label == SolveCase::Case1_1);
  CHECK(sol.alpha == doctest::Approx(alpha).epsilon(1e-12));
  CHECK(sol.objective == doctest::Approx(std::pow(std::cos(alpha - kPi / 6), 2)).epsilon(1e-12));
  CHECK(sol.objective == doctest::Approx(0.8743).epsilon(1e-3));
  CHECK(sol.constraint_value == doctest::Approx(eps).epsilon(1e-12));
}

TEST_CASE("inactive constraint returns the normalized objective vector") {
  const auto sol = solve_closed_form_2d(polar_instance(0.8, 1.0, 0.5, 0.2, 0.9));
  CHECK(sol.case_label == SolveCase::Inactive);
  CHECK(sol.objective == doctest::Approx(0.64).epsilon(1e-12));
}

TEST_CASE("zero objective vector is flagged") {
  const auto sol = solve_closed_form_2d(polar_instance(0.0, 0.0, 1.0, 0.0, 0.1));
  CHECK(sol.case_label == SolveCase::ZeroObjective);
  CHECK(sol.degenerate);
  CHECK(sol.objective == 0.0);
}

TEST_CASE("epsilon zero forces orthogonality to the constraint vector") {
  const auto sol = solve_closed_form_2d(polar_instance(1.0, 0.3, 0.9, 1.2, 0.0));
  CHECK(norm2(sol.a_star) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(dot(sol.a_star, {0.9 * std::cos(1.2), 0.9 * std::sin(1.2)})) < 1e-12);
}

TEST_CASE("grid oracle agrees with the closed form on the paper example") {
  const auto inst = polar_instance(1.0, kPi / 6, 1.5, 0.0, 0.9);
  const auto oracle = brute_force_oracle(inst, 10000);
  const auto closed = solve_closed_form_2d(inst);
  CHECK(std::abs(oracle.objective - closed.objective) < 1e-4);
}

TEST_CASE("oracle approaches the unconstrained objective for huge epsilon") {
  const auto inst = polar_instance(0.7, 2.1, 1.1, 0.4, 1e9);
  const auto oracle = brute_force_oracle(inst, 2000);
  CHECK(oracle.objective == doctest::Approx(0.49).epsilon(1e-6));
}

TEST_CASE("closed form matches the grid oracle on random instances") {
  Rng rng(2024);
  for (int rep = 0; rep < 1000; ++rep) {
    const double re = rng.uniform(0.01, 1.0);
    const double ry = rng.uniform(0.01, 1.0);
    const double te = rng.uniform(0.0, 2.0 * kPi);
    const double ty = rng.uniform(0.0, 2.0 * kPi);
    const double eps = rng.uniform(1e-4, 1.0);
    const auto inst = polar_instance(ry, ty, re, te, eps);
    const auto closed = solve_closed_form_2d(inst);
    const auto oracle = brute_force_oracle(inst, 4000);
    CHECK(std::abs(closed.objective - oracle.objective) < 1e-4);
    // feasibility and norm bound
    CHECK(closed.constraint_value <= eps + 1e-9);
    CHECK(norm2(closed.a_star) <= 1.0 + 1e-9);
  }
}

TEST_CASE("sign symmetry of the representative") {
  Rng rng(5);
  for (int rep = 0; rep < 200; ++rep) {
    const auto inst = polar_instance(rng.uniform(0.1, 1.0), rng.uniform(0.0, 2 * kPi),
                                     rng.uniform(0.1, 1.0), rng.uniform(0.0, 2 * kPi),
                                     rng.uniform(0.01, 0.5));
    const auto sol = solve_closed_form_2d(inst);
    std::vector<double> neg = sol.a_star;
    for (double& v : neg) v = -v;
    const double obj_neg = std::pow(dot(neg, inst.b_yx.entries), 2);
    const double con_neg = std::pow(dot(neg, inst.b_ex.entries), 2);
    CHECK(obj_neg == doctest::Approx(sol.objective).epsilon(1e-12));
    CHECK(con_neg == doctest::Approx(sol.constraint_value).epsilon(1e-12));
    CHECK(dot(sol.a_star, inst.b_yx.entries) >= 0.0);  // tie-break convention
  }
}

TEST_CASE("objective is monotone in epsilon") {
  Rng rng(6);
  for (int rep = 0; rep < 100; ++rep) {
    const double ry = rng.uniform(0.1, 1.0), ty = rng.uniform(0.0, 2 * kPi);
    const double re = rng.uniform(0.1, 1.0), te = rng.uniform(0.0, 2 * kPi);
    double prev = -1.0;
    for (double eps : {0.01, 0.05, 0.1, 0.3, 0.8}) {
      const auto sol = solve_closed_form_2d(polar_instance(ry, ty, re, te, eps));
      CHECK(sol.objective >= prev - 1e-12);
      prev = sol.objective;
    }
  }
}

TEST_CASE("plane projection round trips 3-d inputs") {
  Rng rng(7);
  for (int rep = 0; rep < 200; ++rep) {
    CcmVector byx{{rng.normal(), rng.normal(), rng.normal()}, "yx", false};
    CcmVector bex{{rng.normal(), rng.normal(), rng.normal()}, "ex", false};
    const auto plane = project_to_plane(byx, bex);
    // b_yx reconstructs from (its 2-d coords) * basis
    for (int i = 0; i < 3; ++i) {
      const double rec = plane.b_yx_2d.x() * plane.axis_y[static_cast<size_t>(i)] +
                         plane.b_yx_2d.y() * plane.axis_e[static_cast<size_t>(i)];
      CHECK(std::abs(rec - byx.entries[static_cast<size_t>(i)]) < 1e-12);
      const double rec_e = plane.b_ex_2d.x() * plane.axis_y[static_cast<size_t>(i)] +
                           plane.b_ex_2d.y() * plane.axis_e[static_cast<size_t>(i)];
      CHECK(std::abs(rec_e - bex.entries[static_cast<size_t>(i)]) < 1e-12);
    }
  }
}

TEST_CASE("orthogonal axes and degenerate flags") {
  const auto plane = project_to_plane(vec2(1, 0), vec2(2, 0, "ex"));
  CHECK(plane.degenerate);  // parallel
  CHECK(std::abs(dot(plane.axis_y, plane.axis_e)) < 1e-12);
  CHECK_THROWS_AS(project_to_plane(vec2(0, 0), vec2(0, 0, "ex")), QcqpError);
}

TEST_CASE("general-d solve lifts consistently") {
  Rng rng(8);
  for (int rep = 0; rep < 200; ++rep) {
    CcmVector byx{{rng.normal(), rng.normal(), rng.normal()}, "yx", false};
    CcmVector bex{{rng.normal(), rng.normal(), rng.normal()}, "ex", false};
    for (double& v : byx.entries) v *= 0.3;
    for (double& v : bex.entries) v *= 0.3;
    const double eps = rng.uniform(0.01, 0.5);
    const auto sol = solve(QcqpInstance{byx, bex, eps});
    const auto plane = project_to_plane(byx, bex);
    const auto sol2 = solve_closed_form_2d(plane.b_yx_2d, plane.b_ex_2d, eps);
    CHECK(std::abs(sol.objective - sol2.objective) < 1e-10);
    CHECK(sol.constraint_value <= eps + 1e-9);
    CHECK(norm2(sol.a_star) <= 1.0 + 1e-9);
  }
}

TEST_CASE("d=3 orthogonal configuration keeps the maximizer along b_yx") {
  CcmVector byx{{0.8, 0.0, 0.0}, "yx", false};
  CcmVector bex{{0.0, 0.6, 0.0}, "ex", false};
  const auto sol = solve(QcqpInstance{byx, bex, 0.01});
  CHECK(sol.objective == doctest::Approx(0.64).epsilon(1e-12));
  CHECK(std::abs(sol.a_star[0]) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("d=2 solve defers to the closed form") {
  const auto inst = polar_instance(0.9, 1.0, 0.7, 0.2, 0.05);
  const auto a = solve(inst);
  const auto b = solve_closed_form_2d(inst);
  CHECK(a.objective == doctest::Approx(b.objective).epsilon(1e-12));
  CHECK(a.case_label == b.case_label);
}

TEST_CASE("multi-constraint scan with a single constraint matches the oracle") {
  Rng rng(9);
  for (int rep = 0; rep < 50; ++rep) {
    const auto inst = polar_instance(rng.uniform(0.1, 1.0), rng.uniform(0.0, 2 * kPi),
                                     rng.uniform(0.1, 1.0), rng.uniform(0.0, 2 * kPi),
                                     rng.uniform(0.01, 0.5));
    const PolarVec byx = PolarVec::from_cartesian(inst.b_yx.entries[0], inst.b_yx.entries[1]);
    const auto multi = solve_multi_constraint_2d(byx, {inst.b_ex.entries}, inst.epsilon, 4000);
    const auto closed = solve_closed_form_2d(inst);
    CHECK(std::abs(multi.objective - closed.objective) < 1e-4);
  }
}

TEST_CASE("extra constraints only shrink the multi-constraint objective") {
  Rng rng(10);
  const PolarVec byx{0.9, 0.7};
  std::vector<std::vector<double>> cons;
  double prev = 1e9;
  for (int k = 0; k < 6; ++k) {
    cons.push_back({rng.normal(), rng.normal()});
    const auto sol = solve_multi_constraint_2d(byx, cons, 0.05, 3000);
    CHECK(sol.objective <= prev + 1e-9);
    prev = sol.objective;
    for (const auto& c : cons) CHECK(std::pow(dot(sol.a_star, c), 2) <= 0.05 + 1e-9);
  }
}
