#pragma once

#include <string>
#include <vector>

#include "fairq/gaussian.hpp"

namespace fairq {

struct QcqpError : std::runtime_error {
  explicit QcqpError(const std::string& what) : std::runtime_error(what) {}
};

// max <a, b_yx>^2 over the unit disk subject to <a, b_ex>^2 <= epsilon.
struct QcqpInstance {
  CcmVector b_yx;
  CcmVector b_ex;
  double epsilon = 0.0;
};

enum class SolveCase {
  Inactive,       // constraint slack at the unconstrained maximizer
  ZeroObjective,  // b_yx = 0, nothing to optimize
  Case1_1,
  Case1_2,
  Case1_3,
  // robust, arc constraint (wide / narrow split)
  Case2_1,
  Case2_2,
  Case2_3,
  Case2_4,
  Case3_1,
  Case3_2,
  // robust, three-point constraint
  Case4_1,
  Case4_2,
  Case4_3,
  Case4_4,
  Case4_5,
  Case5_1,
  Case5_2,
  Case5_3,
  GridOracle,
};

const char* to_string(SolveCase c);

struct QcqpSolution {
  std::vector<double> a_star;      // representative with <a, b_yx> >= 0
  double objective = 0.0;          // <a, b_yx>^2
  double constraint_value = 0.0;   // <a, b_ex>^2 w.r.t. the nominal b_ex
  SolveCase case_label = SolveCase::Inactive;
  double alpha = 0.0;              // arccos(sqrt(eps)/r) when the constraint binds
  bool degenerate = false;
};

// reduce an angle to [0, pi); the sign symmetry a <-> -a makes this lossless
double wrap_pi(double angle);

struct PlaneProjection {
  std::vector<double> axis_y;   // unit, along b_yx when it is nonzero
  std::vector<double> axis_e;   // unit, orthogonal completion
  PolarVec b_yx_2d;
  PolarVec b_ex_2d;
  bool degenerate = false;  // parallel vectors or a zero vector
};

// Orthonormal basis of span{b_yx, b_ex} with coordinates of both vectors.
PlaneProjection project_to_plane(const CcmVector& b_yx, const CcmVector& b_ex);

QcqpSolution solve_closed_form_2d(const PolarVec& b_yx, const PolarVec& b_ex, double epsilon);
QcqpSolution solve_closed_form_2d(const QcqpInstance& inst);

// General d (<= 4): project to the span, solve in 2-D, lift back.
QcqpSolution solve(const QcqpInstance& inst);

// Independent check: scan directions over a half circle, use the exact
// optimal radius per direction, then refine locally by golden section.
QcqpSolution brute_force_oracle(const QcqpInstance& inst, int grid_n);

// Same scan against an arbitrary set of 2-D constraint vectors
// (<a, c_i>^2 <= epsilon for every i). Used for the bootstrap variant of
// the Gaussian experiment and as the sampled-constraint robust oracle.
QcqpSolution solve_multi_constraint_2d(const PolarVec& b_yx,
                                       const std::vector<std::vector<double>>& constraints,
                                       double epsilon, int grid_n);

// d-dimensional variant; directions are scanned over a Fibonacci half-sphere
// for d = 3. Exact radius rule per direction as above.
QcqpSolution solve_multi_constraint(const std::vector<double>& b_yx,
                                    const std::vector<std::vector<double>>& constraints,
                                    double epsilon, int grid_n);

}  // namespace fairq
