#pragma once

#include <string>
#include <vector>

#include "fairq/linalg.hpp"

namespace fairq {

struct GaussianError : std::runtime_error {
  explicit GaussianError(const std::string& what) : std::runtime_error(what) {}
};

// 2-D point in polar form; theta kept in [0, 2*pi).
struct PolarVec {
  double r = 0.0;
  double theta = 0.0;

  static PolarVec from_cartesian(double x, double y);
  double x() const;
  double y() const;
  std::vector<double> cartesian() const { return {x(), y()}; }
};

// Whitened cross-covariance between a scalar (y or e) and the feature
// vector x; its norm is at most 1 for any valid joint covariance.
struct CcmVector {
  std::vector<double> entries;
  std::string source_pair;  // "yx", "ex" or "ux"
  bool rank_deficient = false;

  int dim() const { return static_cast<int>(entries.size()); }
  double norm() const { return norm2(entries); }
};

// Zero-mean joint covariance of (x, y, e) with scalar y and e.
struct JointGaussianSpec {
  SymMatrix sigma_xx;          // d x d
  std::vector<double> sigma_xy;  // d
  std::vector<double> sigma_xe;  // d
  double sigma_yy = 1.0;
  double sigma_ee = 1.0;
  double sigma_ye = 0.0;

  int dim_x() const { return sigma_xx.dim(); }
  // Full (d+2) x (d+2) covariance, block order (x..., y, e).
  SymMatrix assemble() const;
  // Throws unless the assembled matrix is symmetric PSD with positive
  // sigma_yy and sigma_ee.
  void validate() const;

  static JointGaussianSpec from_full(const SymMatrix& full);
};

CcmVector ccm(const JointGaussianSpec& spec, const std::string& pair);

// 0.5 * || sigma_w^{-1/2} (sigma_v - sigma_w) sigma_w^{-1/2} ||_F^2
double dbar_divergence(const SymMatrix& sigma_v, const SymMatrix& sigma_w);

// dbar between a 2x2 joint of (e, u) and the product of its marginals;
// equals the squared scalar correlation of the pair.
double independence_dbar(const SymMatrix& joint_eu);

struct ObjectiveMse {
  double objective = 0.0;  // <a, b_yx>^2
  double mse = 0.0;        // sigma_yy * (1 - objective)
};

ObjectiveMse objective_and_mse(const std::vector<double>& a, const JointGaussianSpec& spec);

// Weights w with u = w.x realizing a as the representation direction
// (unit-variance u for unit-norm a).
std::vector<double> synthesize_predictor(const std::vector<double>& a, const JointGaussianSpec& spec);

}  // namespace fairq
