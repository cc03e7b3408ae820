#include "fairq/robust.hpp"

#include <algorithm>
#include <cmath>

namespace fairq {

namespace {
constexpr double kPi = 3.141592653589793238462643383279;
constexpr double kHalfPi = 1.5707963267948966192313216916398;

double sq(double v) { return v * v; }

// signed angular difference reduced to (-pi, pi]
double wrap_signed(double angle) {
  double r = std::fmod(angle, 2.0 * kPi);
  if (r <= -kPi) r += 2.0 * kPi;
  if (r > kPi) r -= 2.0 * kPi;
  return r;
}

std::vector<double> unit_at(double theta) { return {std::cos(theta), std::sin(theta)}; }

void orient(std::vector<double>& a, const PolarVec& b_yx) {
  const std::vector<double> byx = b_yx.cartesian();
  if (dot(a, byx) < 0.0)
    for (double& v : a) v = -v;
}

// max over b in the sector of <a, b>^2; the maximum sits on the outer arc at
// the angle of the arc closest (mod pi) to the direction of a.
double worst_case_sector_constraint(const std::vector<double>& a, const AnnularSector& s) {
  const double na = norm2(a);
  if (na == 0.0 || s.outer_radius() == 0.0) return 0.0;
  const double a_angle = std::atan2(a[1], a[0]);
  double closest = kPi;
  for (double target : {a_angle, a_angle + kPi}) {
    const double off = wrap_signed(target - s.theta_hat);
    const double dist = std::max(0.0, std::abs(off) - s.phi);
    closest = std::min(closest, dist);
  }
  return sq(s.outer_radius() * na * std::cos(std::min(closest, kHalfPi)));
}

}  // namespace

bool AnnularSector::contains(const PolarVec& b, double tol) const {
  if (b.r > outer_radius() + tol || b.r < inner_radius() - tol) return false;
  return std::abs(wrap_signed(b.theta - theta_hat)) <= phi + tol;
}

bool AnnularSector::strictly_contains(const AnnularSector& other) const {
  const bool radial = other.outer_radius() <= outer_radius() && other.inner_radius() >= inner_radius();
  const double shift = std::abs(wrap_signed(other.theta_hat - theta_hat));
  const bool angular = shift + other.phi <= phi;
  const bool proper = other.outer_radius() < outer_radius() || other.inner_radius() > inner_radius() ||
                      shift + other.phi < phi;
  return radial && angular && proper;
}

AnnularSector sector_from_ball(const PolarVec& b_hat_ex, double tau) {
  if (tau < 0.0) throw RobustError("sector_from_ball: tau must be nonnegative");
  AnnularSector s;
  s.r_hat = b_hat_ex.r;
  s.theta_hat = b_hat_ex.theta;
  s.delta = tau;
  if (b_hat_ex.r == 0.0) {
    // undefined direction; fall back to a full half-turn of angular slack
    s.phi = tau > 0.0 ? kHalfPi : 0.0;
    s.clamped = tau > 0.0;
    return s;
  }
  if (tau <= b_hat_ex.r) {
    s.phi = std::asin(tau / b_hat_ex.r);
  } else {
    s.phi = kHalfPi;
    s.clamped = true;
  }
  if (s.r_hat - s.delta < 0.0) s.clamped = true;
  return s;
}

ThreePointSet three_points(const AnnularSector& s) {
  if (s.phi >= kHalfPi) throw RobustError("three_points: phi must be below pi/2");
  ThreePointSet t;
  const double outer = s.outer_radius();
  t.b1 = PolarVec{outer / std::cos(s.phi), s.theta_hat};
  t.b2 = PolarVec{outer, s.theta_hat + s.phi};
  t.b3 = PolarVec{outer, s.theta_hat - s.phi};
  return t;
}

Regime regime(const AnnularSector& s, double epsilon) {
  return std::sqrt(epsilon) >= s.outer_radius() * std::sin(s.phi) ? Regime::Wide : Regime::Narrow;
}

double tau_of_n(const UncertaintyConfig& cfg, const JointGaussianSpec& spec) {
  if (cfg.n < 1) throw RobustError("tau_of_n: n must be at least 1");
  if (cfg.delta_conf <= 0.0 || cfg.delta_conf >= 1.0) throw RobustError("tau_of_n: delta must be in (0,1)");
  const double d = static_cast<double>(spec.dim_x());
  double max_sigma = 0.0;
  for (int i = 0; i < spec.dim_x(); ++i) max_sigma = std::max(max_sigma, std::sqrt(spec.sigma_xx(i, i)));
  const double sigma_e = std::sqrt(spec.sigma_ee);
  const double whitener_norm = spectral_norm(sym_psd_inv_sqrt(spec.sigma_xx).m);
  return whitener_norm * cfg.constant_c * std::sqrt(sigma_e) * max_sigma /
         (static_cast<double>(cfg.n) * std::sqrt(d)) * std::log(4.0 / cfg.delta_conf);
}

namespace {

// Closed-form pieces shared by the solvers and the gap classifier. Each piece
// is the alignment amplitude <a*, b_yx> / r_y as a trig expression of the
// relative angle, together with the optimizer angle/radius.

struct Piece {
  SolveCase label;
  double amplitude;   // in [0, 1]
  double opt_angle;   // absolute angle of a*
  double opt_radius;  // in [0, 1]
};

// plain QCQP vs a single constraint vector at (re, te)
Piece plain_piece(double t_y_abs, double re, double te, double sqrt_eps) {
  const double ty_rel = wrap_pi(t_y_abs - te);
  if (re == 0.0 || sqrt_eps >= re) return {SolveCase::Inactive, 1.0, t_y_abs, 1.0};
  const double alpha = std::acos(std::min(1.0, sqrt_eps / re));
  if (ty_rel < alpha) return {SolveCase::Case1_1, std::cos(alpha - ty_rel), te + alpha, 1.0};
  if (ty_rel < kPi - alpha) return {SolveCase::Case1_2, 1.0, t_y_abs, 1.0};
  return {SolveCase::Case1_3, std::cos(ty_rel - (kPi - alpha)), te - alpha, 1.0};
}

// robust QCQP against the max-radius arc (infinite constraint family)
Piece arc_piece(double t_y_abs, const AnnularSector& s, double sqrt_eps) {
  const double outer = s.outer_radius();
  if (outer == 0.0 || sqrt_eps >= outer) return {SolveCase::Inactive, 1.0, t_y_abs, 1.0};
  const double abar = std::acos(std::min(1.0, sqrt_eps / outer));
  const double cos_abar = std::cos(abar);
  const double t = wrap_pi(t_y_abs - s.theta_hat);
  const double phi = s.phi;
  if (cos_abar >= std::sin(phi)) {  // wide
    if (t < phi) return {SolveCase::Case2_1, cos_abar, t_y_abs, cos_abar};
    if (t < phi + abar) return {SolveCase::Case2_2, std::cos(phi + abar - t), s.theta_hat + phi + abar, 1.0};
    if (t < kPi - phi - abar) return {SolveCase::Case2_3, 1.0, t_y_abs, 1.0};
    if (t < kPi - phi) return {SolveCase::Case2_4, std::cos(t - (kPi - phi - abar)), s.theta_hat - phi - abar, 1.0};
    return {SolveCase::Case2_1, cos_abar, t_y_abs, cos_abar};
  }
  // narrow: the feasible set pinches at the axis perpendicular to theta_hat
  if (t < phi) return {SolveCase::Case3_1, cos_abar, t_y_abs, cos_abar};
  if (t < kPi - phi) {
    const double rho = cos_abar / std::sin(phi);
    return {SolveCase::Case3_2, rho * std::sin(t), s.theta_hat + kHalfPi, rho};
  }
  return {SolveCase::Case3_1, cos_abar, t_y_abs, cos_abar};
}

// robust QCQP against the three-point constraint set
Piece three_piece(double t_y_abs, const AnnularSector& s, double sqrt_eps) {
  const double outer = s.outer_radius();
  const double phi = s.phi;
  if (outer == 0.0) return {SolveCase::Inactive, 1.0, t_y_abs, 1.0};
  if (phi < kHalfPi && sqrt_eps >= outer / std::cos(phi))
    return {SolveCase::Inactive, 1.0, t_y_abs, 1.0};
  if (phi < kHalfPi && sqrt_eps >= outer) {
    // only the lengthened centre point b1 can bind
    return plain_piece(t_y_abs, outer / std::cos(phi), s.theta_hat, sqrt_eps);
  }
  const double abar = std::acos(std::min(1.0, sqrt_eps / outer));
  const double cos_abar = std::cos(abar);
  const double t = wrap_pi(t_y_abs - s.theta_hat);
  if (phi < kHalfPi && cos_abar >= std::sin(phi)) {  // wide
    if (t < phi) return {SolveCase::Case4_1, cos_abar * std::cos(phi - t), s.theta_hat + phi, cos_abar};
    if (t < phi + abar) return {SolveCase::Case4_2, std::cos(phi + abar - t), s.theta_hat + phi + abar, 1.0};
    if (t < kPi - phi - abar) return {SolveCase::Case4_3, 1.0, t_y_abs, 1.0};
    if (t < kPi - phi) return {SolveCase::Case4_4, std::cos(t - (kPi - phi - abar)), s.theta_hat - phi - abar, 1.0};
    return {SolveCase::Case4_5, cos_abar * std::cos(t - (kPi - phi)), s.theta_hat - phi, cos_abar};
  }
  // narrow
  const double sin_phi = std::sin(phi);
  if (t < phi) return {SolveCase::Case5_1, cos_abar * std::cos(phi - t), s.theta_hat + phi, cos_abar};
  if (t < kPi - phi) {
    const double rho = cos_abar / sin_phi;
    return {SolveCase::Case5_2, rho * std::sin(t), s.theta_hat + kHalfPi, rho};
  }
  return {SolveCase::Case5_3, cos_abar * std::cos(t - (kPi - phi)), s.theta_hat - phi, cos_abar};
}

QcqpSolution solution_from_piece(const Piece& piece, const PolarVec& b_yx, const AnnularSector& s) {
  QcqpSolution sol;
  sol.case_label = piece.label;
  sol.a_star = unit_at(piece.opt_angle);
  sol.a_star[0] *= piece.opt_radius;
  sol.a_star[1] *= piece.opt_radius;
  orient(sol.a_star, b_yx);
  sol.objective = sq(dot(sol.a_star, b_yx.cartesian()));
  sol.constraint_value = worst_case_sector_constraint(sol.a_star, s);
  return sol;
}

}  // namespace

QcqpSolution solve_robust_infinite(const PolarVec& b_yx, const AnnularSector& s, double epsilon) {
  if (epsilon < 0.0) throw RobustError("epsilon must be nonnegative");
  if (b_yx.r == 0.0) {
    QcqpSolution sol;
    sol.a_star = {0.0, 0.0};
    sol.case_label = SolveCase::ZeroObjective;
    sol.degenerate = true;
    return sol;
  }
  const double sqrt_eps = std::sqrt(epsilon);
  const Piece piece = arc_piece(b_yx.theta, s, sqrt_eps);
  QcqpSolution sol = solution_from_piece(piece, b_yx, s);
  const double outer = s.outer_radius();
  sol.alpha = (outer > 0.0 && sqrt_eps < outer) ? std::acos(sqrt_eps / outer) : 0.0;
  return sol;
}

QcqpSolution solve_robust_three(const PolarVec& b_yx, const AnnularSector& s, double epsilon) {
  if (epsilon < 0.0) throw RobustError("epsilon must be nonnegative");
  if (b_yx.r == 0.0) {
    QcqpSolution sol;
    sol.a_star = {0.0, 0.0};
    sol.case_label = SolveCase::ZeroObjective;
    sol.degenerate = true;
    return sol;
  }
  const double sqrt_eps = std::sqrt(epsilon);
  const Piece piece = three_piece(b_yx.theta, s, sqrt_eps);
  QcqpSolution sol = solution_from_piece(piece, b_yx, s);
  const double outer = s.outer_radius();
  sol.alpha = (outer > 0.0 && sqrt_eps < outer) ? std::acos(sqrt_eps / outer) : 0.0;
  return sol;
}

QcqpSolution sampled_constraint_oracle(const PolarVec& b_yx, const AnnularSector& s, double epsilon,
                                       int n_arc, int grid_n, bool arc_only) {
  if (n_arc < 2) throw RobustError("sampled_constraint_oracle: n_arc too small");
  std::vector<std::vector<double>> cons;
  const double outer = s.outer_radius();
  if (arc_only) {
    cons.reserve(static_cast<size_t>(n_arc));
    for (int i = 0; i < n_arc; ++i) {
      const double theta = s.theta_hat - s.phi + 2.0 * s.phi * i / (n_arc - 1);
      cons.push_back({outer * std::cos(theta), outer * std::sin(theta)});
    }
  } else {
    const int n_r = 8;
    const double inner = s.inner_radius();
    for (int k = 0; k < n_r; ++k) {
      const double r = inner + (outer - inner) * k / (n_r - 1);
      for (int i = 0; i < n_arc; ++i) {
        const double theta = s.theta_hat - s.phi + 2.0 * s.phi * i / (n_arc - 1);
        cons.push_back({r * std::cos(theta), r * std::sin(theta)});
      }
    }
  }
  return solve_multi_constraint_2d(b_yx, cons, epsilon, grid_n);
}

const char* to_string(GapCategory c) {
  switch (c) {
    case GapCategory::AnyUncertaintyHurts: return "any_uncertainty_hurts";
    case GapCategory::SomeUncertaintyOk: return "some_uncertainty_ok";
    case GapCategory::FreeFairness: return "free_fairness";
  }
  return "?";
}

namespace {

bool piece_is_flat(SolveCase c) {
  return c == SolveCase::Inactive || c == SolveCase::Case1_2 || c == SolveCase::Case2_3 ||
         c == SolveCase::Case4_3;
}

std::string gap_case_letter(SolveCase plain, SolveCase robust) {
  const bool plain_flat = plain == SolveCase::Case1_2 || plain == SolveCase::Inactive;
  switch (robust) {
    case SolveCase::Case4_1:
      if (plain == SolveCase::Case1_1) return "A";
      if (plain == SolveCase::Case1_3) return "H";
      break;
    case SolveCase::Case4_2:
      if (plain == SolveCase::Case1_1) return "B";
      if (plain_flat) return "C";
      break;
    case SolveCase::Case4_3:
      if (plain_flat) return "D";
      break;
    case SolveCase::Case4_4:
      if (plain_flat) return "E";
      if (plain == SolveCase::Case1_3) return "F";
      break;
    case SolveCase::Case4_5:
      if (plain == SolveCase::Case1_3) return "G";
      break;
    case SolveCase::Case5_1:
      if (plain == SolveCase::Case1_1) return "A2";
      if (plain == SolveCase::Case1_3) return "H2";
      break;
    case SolveCase::Case5_2:
      if (plain == SolveCase::Case1_1) return "B2";
      if (plain_flat) return "C2";
      if (plain == SolveCase::Case1_3) return "F2";
      break;
    case SolveCase::Case5_3:
      if (plain == SolveCase::Case1_3) return "G2";
      break;
    default:
      break;
  }
  // combination the paper's table does not list (e.g. a plain-flat band
  // overlapping the sector's angular band when alpha + theta_e < phi)
  return std::string("X(") + to_string(plain) + "," + to_string(robust) + ")";
}

}  // namespace

GapReport gap_psi(const PolarVec& b_yx, const PolarVec& true_b_ex, const AnnularSector& s, double epsilon) {
  if (b_yx.r <= 0.0) throw RobustError("gap_psi: b_yx must be nonzero");
  GapReport rep;
  rep.outside_sector = !s.contains(true_b_ex, 1e-9);

  const QcqpSolution plain = solve_closed_form_2d(b_yx, true_b_ex, epsilon);
  const QcqpSolution robust = solve_robust_three(b_yx, s, epsilon);
  rep.psi1 = std::sqrt(plain.objective) / b_yx.r;
  rep.psi2 = std::sqrt(robust.objective) / b_yx.r;
  rep.gap = rep.psi1 - rep.psi2;

  // The per-case formulas are stated for theta_e >= theta_hat; the mirrored
  // configuration reduces to it by reflecting all angles about theta_hat.
  const double sqrt_eps = std::sqrt(epsilon);
  const bool mirror = wrap_signed(true_b_ex.theta - s.theta_hat) < 0.0;
  const double rel_y = mirror ? s.theta_hat - b_yx.theta : b_yx.theta - s.theta_hat;
  const double rel_e = std::abs(wrap_signed(true_b_ex.theta - s.theta_hat));
  const double t_y_abs = wrap_pi(rel_y);  // coordinates with theta_hat = 0

  AnnularSector centered = s;
  centered.theta_hat = 0.0;
  const Piece p1 = plain_piece(t_y_abs, true_b_ex.r, rel_e, sqrt_eps);
  const Piece p2 = three_piece(t_y_abs, centered, sqrt_eps);
  rep.case_value = p1.amplitude - p2.amplitude;
  rep.case_label = gap_case_letter(p1.label, p2.label);

  const bool plain_flat = p1.label == SolveCase::Case1_2 || p1.label == SolveCase::Inactive;
  if (!plain_flat) {
    rep.category = GapCategory::AnyUncertaintyHurts;
  } else {
    rep.category = piece_is_flat(p2.label) ? GapCategory::FreeFairness : GapCategory::SomeUncertaintyOk;
  }
  return rep;
}

MonotonicityResult monotonicity_check(const std::vector<AnnularSector>& sectors, const PolarVec& b_yx,
                                      const PolarVec& true_b_ex, double epsilon, double tol) {
  if (sectors.size() < 2) throw RobustError("monotonicity_check: need at least two sectors");
  for (size_t i = 0; i + 1 < sectors.size(); ++i)
    if (!sectors[i].strictly_contains(sectors[i + 1]))
      throw RobustError("monotonicity_check: sectors not strictly nested");

  MonotonicityResult out;
  for (const AnnularSector& s : sectors)
    out.objectives.push_back(solve_robust_three(b_yx, s, epsilon).objective);

  const double plain_obj = solve_closed_form_2d(b_yx, true_b_ex, epsilon).objective;
  for (size_t i = 0; i + 1 < out.objectives.size(); ++i) {
    const double a = out.objectives[i];
    const double b = out.objectives[i + 1];
    if (b < a - tol) out.non_decreasing = false;
    if (std::abs(b - a) <= tol) {
      if (std::abs(a - plain_obj) > tol || std::abs(b - plain_obj) > tol) out.plateau_matches_plain = false;
    }
  }
  return out;
}

}  // namespace fairq
