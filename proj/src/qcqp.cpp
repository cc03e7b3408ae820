#include "fairq/qcqp.hpp"

#include <algorithm>
#include <cmath>

namespace fairq {

namespace {
constexpr double kPi = 3.141592653589793238462643383279;

std::vector<double> unit_at(double theta) { return {std::cos(theta), std::sin(theta)}; }

// flip the sign so the representative has <a, b_yx> >= 0
void orient(std::vector<double>& a, const std::vector<double>& b_yx) {
  if (dot(a, b_yx) < 0.0)
    for (double& v : a) v = -v;
}

double sq(double v) { return v * v; }
}  // namespace

const char* to_string(SolveCase c) {
  switch (c) {
    case SolveCase::Inactive: return "inactive";
    case SolveCase::ZeroObjective: return "zero_objective";
    case SolveCase::Case1_1: return "1.1";
    case SolveCase::Case1_2: return "1.2";
    case SolveCase::Case1_3: return "1.3";
    case SolveCase::Case2_1: return "2.1";
    case SolveCase::Case2_2: return "2.2";
    case SolveCase::Case2_3: return "2.3";
    case SolveCase::Case2_4: return "2.4";
    case SolveCase::Case3_1: return "3.1";
    case SolveCase::Case3_2: return "3.2";
    case SolveCase::Case4_1: return "4.1";
    case SolveCase::Case4_2: return "4.2";
    case SolveCase::Case4_3: return "4.3";
    case SolveCase::Case4_4: return "4.4";
    case SolveCase::Case4_5: return "4.5";
    case SolveCase::Case5_1: return "5.1";
    case SolveCase::Case5_2: return "5.2";
    case SolveCase::Case5_3: return "5.3";
    case SolveCase::GridOracle: return "grid";
  }
  return "?";
}

double wrap_pi(double angle) {
  double r = std::fmod(angle, kPi);
  if (r < 0.0) r += kPi;
  if (r >= kPi) r = 0.0;  // guard against fmod rounding to pi
  return r;
}

PlaneProjection project_to_plane(const CcmVector& b_yx, const CcmVector& b_ex) {
  const int d = std::max(b_yx.dim(), b_ex.dim());
  const double ny = b_yx.norm();
  const double ne = b_ex.norm();
  if (ny == 0.0 && ne == 0.0) throw QcqpError("project_to_plane: both vectors are zero");

  PlaneProjection out;
  const std::vector<double>& primary = ny > 0.0 ? b_yx.entries : b_ex.entries;
  const double primary_norm = ny > 0.0 ? ny : ne;
  out.axis_y.resize(static_cast<size_t>(d));
  for (int i = 0; i < d; ++i) out.axis_y[static_cast<size_t>(i)] = primary[static_cast<size_t>(i)] / primary_norm;

  // Gram-Schmidt the second vector against the first axis.
  std::vector<double> res(static_cast<size_t>(d), 0.0);
  if (ny > 0.0 && ne > 0.0) {
    const double proj = dot(b_ex.entries, out.axis_y);
    for (int i = 0; i < d; ++i)
      res[static_cast<size_t>(i)] = b_ex.entries[static_cast<size_t>(i)] - proj * out.axis_y[static_cast<size_t>(i)];
  }
  double rn = norm2(res);
  if (rn < 1e-12 * std::max(1.0, ne)) {
    // parallel or one vector zero: pick any orthogonal completion
    out.degenerate = true;
    for (int k = 0; k < d; ++k) {
      std::fill(res.begin(), res.end(), 0.0);
      res[static_cast<size_t>(k)] = 1.0;
      const double proj = dot(res, out.axis_y);
      for (int i = 0; i < d; ++i) res[static_cast<size_t>(i)] -= proj * out.axis_y[static_cast<size_t>(i)];
      rn = norm2(res);
      if (rn > 1e-6) break;
    }
  }
  out.axis_e = res;
  for (double& v : out.axis_e) v /= rn;

  out.b_yx_2d = PolarVec::from_cartesian(dot(b_yx.entries, out.axis_y), dot(b_yx.entries, out.axis_e));
  out.b_ex_2d = PolarVec::from_cartesian(dot(b_ex.entries, out.axis_y), dot(b_ex.entries, out.axis_e));
  return out;
}

QcqpSolution solve_closed_form_2d(const PolarVec& b_yx, const PolarVec& b_ex, double epsilon) {
  if (epsilon < 0.0) throw QcqpError("epsilon must be nonnegative");
  const double ry = b_yx.r;
  const double ty = b_yx.theta;
  const double re = b_ex.r;
  const double te = b_ex.theta;
  const std::vector<double> byx = b_yx.cartesian();
  const std::vector<double> bex = b_ex.cartesian();
  const double sqrt_eps = std::sqrt(epsilon);

  QcqpSolution sol;
  if (ry == 0.0) {
    sol.a_star = {0.0, 0.0};
    sol.case_label = SolveCase::ZeroObjective;
    sol.degenerate = true;
    return sol;
  }
  if (re == 0.0 || sqrt_eps >= re) {
    sol.a_star = unit_at(ty);
    orient(sol.a_star, byx);
    sol.objective = ry * ry;
    sol.constraint_value = sq(dot(sol.a_star, bex));
    sol.case_label = SolveCase::Inactive;
    return sol;
  }

  const double alpha = std::acos(std::min(1.0, sqrt_eps / re));
  const double psi = wrap_pi(ty - te);
  sol.alpha = alpha;
  // Case ranges are reduced mod pi (the solution sets come in +- pairs);
  // intervals are half-open on the upper end, values agree at boundaries.
  if (psi < alpha) {
    sol.case_label = SolveCase::Case1_1;
    sol.a_star = unit_at(te + alpha);
  } else if (psi < kPi - alpha) {
    sol.case_label = SolveCase::Case1_2;
    sol.a_star = unit_at(ty);
  } else {
    sol.case_label = SolveCase::Case1_3;
    sol.a_star = unit_at(te - alpha);
  }
  orient(sol.a_star, byx);
  sol.objective = sq(dot(sol.a_star, byx));
  sol.constraint_value = sq(dot(sol.a_star, bex));
  return sol;
}

QcqpSolution solve_closed_form_2d(const QcqpInstance& inst) {
  if (inst.b_yx.dim() != 2 || inst.b_ex.dim() != 2) throw QcqpError("solve_closed_form_2d: need d = 2");
  const PolarVec byx = PolarVec::from_cartesian(inst.b_yx.entries[0], inst.b_yx.entries[1]);
  const PolarVec bex = PolarVec::from_cartesian(inst.b_ex.entries[0], inst.b_ex.entries[1]);
  return solve_closed_form_2d(byx, bex, inst.epsilon);
}

QcqpSolution solve(const QcqpInstance& inst) {
  if (inst.b_yx.dim() != inst.b_ex.dim()) throw QcqpError("solve: dimension mismatch");
  const int d = inst.b_yx.dim();
  if (d < 1 || d > 4) throw QcqpError("solve: supported dims are 1..4");
  if (inst.b_yx.norm() == 0.0) {
    QcqpSolution sol;
    sol.a_star.assign(static_cast<size_t>(d), 0.0);
    sol.case_label = SolveCase::ZeroObjective;
    sol.degenerate = true;
    return sol;
  }
  if (d == 1) {
    // scalar case: a = +-min(1, sqrt(eps)/|b_ex|)
    const double be = inst.b_ex.entries[0];
    const double by = inst.b_yx.entries[0];
    double a = 1.0;
    QcqpSolution sol;
    if (be != 0.0 && std::sqrt(inst.epsilon) < std::abs(be)) {
      a = std::sqrt(inst.epsilon) / std::abs(be);
      sol.case_label = SolveCase::Case1_1;
      sol.alpha = 0.0;
    } else {
      sol.case_label = SolveCase::Inactive;
    }
    if (by < 0.0) a = -a;
    sol.a_star = {a};
    sol.objective = sq(a * by);
    sol.constraint_value = sq(a * be);
    return sol;
  }

  const PlaneProjection plane = project_to_plane(inst.b_yx, inst.b_ex);
  QcqpSolution sol2 = solve_closed_form_2d(plane.b_yx_2d, plane.b_ex_2d, inst.epsilon);

  QcqpSolution sol = sol2;
  sol.degenerate = sol.degenerate || plane.degenerate;
  sol.a_star.assign(static_cast<size_t>(d), 0.0);
  for (int i = 0; i < d; ++i)
    sol.a_star[static_cast<size_t>(i)] =
        sol2.a_star[0] * plane.axis_y[static_cast<size_t>(i)] + sol2.a_star[1] * plane.axis_e[static_cast<size_t>(i)];
  sol.objective = sq(dot(sol.a_star, inst.b_yx.entries));
  sol.constraint_value = sq(dot(sol.a_star, inst.b_ex.entries));
  return sol;
}

namespace {

// value of the best feasible point along direction theta
struct DirectionScan {
  const std::vector<double>* byx;
  const std::vector<std::vector<double>>* constraints;
  double sqrt_eps;

  double radius(const std::vector<double>& dir) const {
    double rho = 1.0;
    for (const auto& c : *constraints) {
      const double inner = std::abs(dot(dir, c));
      if (inner * rho > sqrt_eps) rho = sqrt_eps / inner;
    }
    return rho;
  }

  double value(double theta) const {
    const std::vector<double> dir = unit_at(theta);
    return radius(dir) * std::abs(dot(dir, *byx));
  }
};

// golden-section refinement of a locally unimodal maximum
double golden_refine(const DirectionScan& scan, double lo, double hi, int iters) {
  const double gr = 0.6180339887498948482;
  double a = lo, b = hi;
  double x1 = b - gr * (b - a);
  double x2 = a + gr * (b - a);
  double f1 = scan.value(x1);
  double f2 = scan.value(x2);
  for (int i = 0; i < iters; ++i) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + gr * (b - a);
      f2 = scan.value(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - gr * (b - a);
      f1 = scan.value(x1);
    }
  }
  return f1 > f2 ? x1 : x2;
}

}  // namespace

QcqpSolution solve_multi_constraint_2d(const PolarVec& b_yx,
                                       const std::vector<std::vector<double>>& constraints,
                                       double epsilon, int grid_n) {
  if (grid_n < 8) throw QcqpError("grid_n too small");
  const std::vector<double> byx = b_yx.cartesian();
  DirectionScan scan{&byx, &constraints, std::sqrt(epsilon)};

  QcqpSolution sol;
  sol.case_label = SolveCase::GridOracle;
  if (b_yx.r == 0.0) {
    sol.a_star = {0.0, 0.0};
    sol.degenerate = true;
    return sol;
  }

  const double step = kPi / grid_n;
  double best_theta = 0.0;
  double best_val = -1.0;
  for (int j = 0; j < grid_n; ++j) {
    const double theta = j * step;
    const double v = scan.value(theta);
    if (v > best_val) {
      best_val = v;
      best_theta = theta;
    }
  }
  best_theta = golden_refine(scan, best_theta - step, best_theta + step, 80);

  std::vector<double> dir = unit_at(best_theta);
  const double rho = scan.radius(dir);
  sol.a_star = {rho * dir[0], rho * dir[1]};
  orient(sol.a_star, byx);
  sol.objective = sq(dot(sol.a_star, byx));
  for (const auto& c : constraints) sol.constraint_value = std::max(sol.constraint_value, sq(dot(sol.a_star, c)));
  return sol;
}

QcqpSolution brute_force_oracle(const QcqpInstance& inst, int grid_n) {
  if (inst.b_yx.dim() != 2) throw QcqpError("brute_force_oracle: need d = 2");
  const PolarVec byx = PolarVec::from_cartesian(inst.b_yx.entries[0], inst.b_yx.entries[1]);
  const std::vector<std::vector<double>> cons = {inst.b_ex.entries};
  QcqpSolution sol = solve_multi_constraint_2d(byx, cons, inst.epsilon, grid_n);
  sol.constraint_value = sq(dot(sol.a_star, inst.b_ex.entries));
  return sol;
}

QcqpSolution solve_multi_constraint(const std::vector<double>& b_yx,
                                    const std::vector<std::vector<double>>& constraints,
                                    double epsilon, int grid_n) {
  const int d = static_cast<int>(b_yx.size());
  if (d == 2) {
    return solve_multi_constraint_2d(PolarVec::from_cartesian(b_yx[0], b_yx[1]), constraints, epsilon, grid_n);
  }
  if (d != 3) throw QcqpError("solve_multi_constraint: d must be 2 or 3");

  // Fibonacci half-sphere scan; coarser than the 2-D path, intended for the
  // d = 3 experiment variants rather than tolerance-critical checks.
  const double sqrt_eps = std::sqrt(epsilon);
  QcqpSolution sol;
  sol.case_label = SolveCase::GridOracle;
  const double ny = norm2(b_yx);
  if (ny == 0.0) {
    sol.a_star.assign(3, 0.0);
    sol.degenerate = true;
    return sol;
  }

  auto eval = [&](const std::vector<double>& dir) {
    double rho = 1.0;
    for (const auto& c : constraints) {
      const double inner = std::abs(dot(dir, c));
      if (inner * rho > sqrt_eps) rho = sqrt_eps / inner;
    }
    return std::make_pair(rho, rho * std::abs(dot(dir, b_yx)));
  };

  const double golden_angle = kPi * (3.0 - std::sqrt(5.0));
  std::vector<double> best_dir = {1.0, 0.0, 0.0};
  double best_val = -1.0;
  for (int j = 0; j < grid_n; ++j) {
    const double z = (j + 0.5) / grid_n;  // half sphere: z in (0, 1)
    const double rxy = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double ang = golden_angle * j;
    const std::vector<double> dir = {rxy * std::cos(ang), rxy * std::sin(ang), z};
    const double v = eval(dir).second;
    if (v > best_val) {
      best_val = v;
      best_dir = dir;
    }
  }
  // local pattern refinement on the sphere
  double h = std::sqrt(4.0 / grid_n);
  for (int it = 0; it < 60; ++it) {
    bool improved = false;
    for (int axis = 0; axis < 3 && !improved; ++axis) {
      for (double sgn : {-1.0, 1.0}) {
        std::vector<double> cand = best_dir;
        cand[static_cast<size_t>(axis)] += sgn * h;
        const double cn = norm2(cand);
        for (double& v : cand) v /= cn;
        const double val = eval(cand).second;
        if (val > best_val) {
          best_val = val;
          best_dir = cand;
          improved = true;
          break;
        }
      }
    }
    if (!improved) h *= 0.5;
  }

  const auto [rho, val] = eval(best_dir);
  sol.a_star = {rho * best_dir[0], rho * best_dir[1], rho * best_dir[2]};
  orient(sol.a_star, b_yx);
  sol.objective = sq(dot(sol.a_star, b_yx));
  for (const auto& c : constraints) sol.constraint_value = std::max(sol.constraint_value, sq(dot(sol.a_star, c)));
  return sol;
}

}  // namespace fairq
