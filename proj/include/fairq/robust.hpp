#pragma once

#include <string>
#include <vector>

#include "fairq/qcqp.hpp"

namespace fairq {

struct RobustError : std::runtime_error {
  explicit RobustError(const std::string& what) : std::runtime_error(what) {}
};

// Annular sector A(delta, phi) of polar points around an estimated CCM:
// radius within delta of r_hat and angle within phi of theta_hat.
struct AnnularSector {
  double r_hat = 0.0;
  double theta_hat = 0.0;
  double delta = 0.0;
  double phi = 0.0;  // in [0, pi/2]
  bool clamped = false;  // inner radius clamped at 0 or phi clamped at pi/2

  double outer_radius() const { return r_hat + delta; }
  double inner_radius() const { return r_hat - delta > 0.0 ? r_hat - delta : 0.0; }
  bool contains(const PolarVec& b, double tol = 1e-12) const;
  // strict containment of other in this (allows shared boundary nowhere)
  bool strictly_contains(const AnnularSector& other) const;
};

struct ThreePointSet {
  PolarVec b1;  // ((r_hat+delta)/cos(phi), theta_hat)
  PolarVec b2;  // (r_hat+delta, theta_hat+phi)
  PolarVec b3;  // (r_hat+delta, theta_hat-phi)
};

// Sample-count driven uncertainty (Prop-style tau(n) bound).
struct UncertaintyConfig {
  double delta_conf = 0.05;  // failure probability delta
  double constant_c = 1.0;   // unspecified universal constant, calibrated per experiment
  long long n = 1;           // labeled sensitive attributes
};

// Smallest sector around b_hat_ex containing the ball B(b_hat_ex, tau).
AnnularSector sector_from_ball(const PolarVec& b_hat_ex, double tau);

ThreePointSet three_points(const AnnularSector& s);

enum class Regime { Wide, Narrow };
// Wide iff sqrt(eps) >= (r_hat+delta)*sin(phi); both case systems agree at equality.
Regime regime(const AnnularSector& s, double epsilon);

// tau(n) = ||Sigma_xx^{-1/2}|| * c * sqrt(sigma_e) * max_i sigma_i / (n sqrt(d)) * log(4/delta)
double tau_of_n(const UncertaintyConfig& cfg, const JointGaussianSpec& spec);

// Worst case over the whole sector (equivalently its max-radius arc).
QcqpSolution solve_robust_infinite(const PolarVec& b_yx, const AnnularSector& s, double epsilon);

// Conservative three-constraint relaxation; feasible set is a subset of the
// infinite-constraint one, so its objective never exceeds it.
QcqpSolution solve_robust_three(const PolarVec& b_yx, const AnnularSector& s, double epsilon);

// Discretize the constraint family and brute-force the disk. arc_only=true
// samples the max-radius arc; false samples the full sector.
QcqpSolution sampled_constraint_oracle(const PolarVec& b_yx, const AnnularSector& s, double epsilon,
                                       int n_arc, int grid_n, bool arc_only = true);

enum class GapCategory { AnyUncertaintyHurts, SomeUncertaintyOk, FreeFairness };

const char* to_string(GapCategory c);

// psi1/psi2 are alignment amplitudes sqrt(objective)/r_y, the scale on which
// the per-case gap formulas are exact trigonometric expressions.
struct GapReport {
  double psi1 = 0.0;
  double psi2 = 0.0;
  double gap = 0.0;         // psi1 - psi2, from the two solvers
  double case_value = 0.0;  // same quantity from the per-case formula
  std::string case_label;
  GapCategory category = GapCategory::AnyUncertaintyHurts;
  bool outside_sector = false;  // true b_ex not in s: the 1-delta event failed
};

GapReport gap_psi(const PolarVec& b_yx, const PolarVec& true_b_ex, const AnnularSector& s, double epsilon);

struct MonotonicityResult {
  std::vector<double> objectives;       // per sector, from solve_robust_three
  bool non_decreasing = true;
  bool plateau_matches_plain = true;    // equal neighbours both match the plain QCQP
};

// Sectors must be strictly nested (each contains the next). true_b_ex is the
// reference for the plain QCQP objective that plateaus must match.
MonotonicityResult monotonicity_check(const std::vector<AnnularSector>& sectors, const PolarVec& b_yx,
                                      const PolarVec& true_b_ex, double epsilon, double tol = 1e-9);

}  // namespace fairq
