#include "fairq/gaussian.hpp"

#include <cmath>

namespace fairq {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

PolarVec PolarVec::from_cartesian(double x, double y) {
  PolarVec p;
  p.r = std::hypot(x, y);
  p.theta = p.r > 0.0 ? std::atan2(y, x) : 0.0;
  if (p.theta < 0.0) p.theta += kTwoPi;
  return p;
}

double PolarVec::x() const { return r * std::cos(theta); }
double PolarVec::y() const { return r * std::sin(theta); }

SymMatrix JointGaussianSpec::assemble() const {
  const int d = dim_x();
  SymMatrix full(d + 2);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) full.at(i, j) = sigma_xx(i, j);
    full.at(i, d) = full.at(d, i) = sigma_xy[static_cast<size_t>(i)];
    full.at(i, d + 1) = full.at(d + 1, i) = sigma_xe[static_cast<size_t>(i)];
  }
  full.at(d, d) = sigma_yy;
  full.at(d + 1, d + 1) = sigma_ee;
  full.at(d, d + 1) = full.at(d + 1, d) = sigma_ye;
  return full;
}

void JointGaussianSpec::validate() const {
  if (sigma_yy <= 0.0 || sigma_ee <= 0.0) throw GaussianError("sigma_yy and sigma_ee must be positive");
  if (static_cast<int>(sigma_xy.size()) != dim_x() || static_cast<int>(sigma_xe.size()) != dim_x())
    throw GaussianError("cross-covariance length does not match dim_x");
  if (min_eigenvalue(assemble()) < -kPsdClampEps) throw GaussianError("joint covariance not PSD");
}

JointGaussianSpec JointGaussianSpec::from_full(const SymMatrix& full) {
  const int d = full.dim() - 2;
  if (d < 1) throw GaussianError("joint covariance must be at least 3x3");
  JointGaussianSpec spec;
  spec.sigma_xx = SymMatrix(d);
  spec.sigma_xy.resize(static_cast<size_t>(d));
  spec.sigma_xe.resize(static_cast<size_t>(d));
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) spec.sigma_xx.at(i, j) = full(i, j);
    spec.sigma_xy[static_cast<size_t>(i)] = full(i, d);
    spec.sigma_xe[static_cast<size_t>(i)] = full(i, d + 1);
  }
  spec.sigma_yy = full(d, d);
  spec.sigma_ee = full(d + 1, d + 1);
  spec.sigma_ye = full(d, d + 1);
  spec.validate();
  return spec;
}

CcmVector ccm(const JointGaussianSpec& spec, const std::string& pair) {
  const std::vector<double>* cross = nullptr;
  double scalar_var = 0.0;
  if (pair == "yx") {
    cross = &spec.sigma_xy;
    scalar_var = spec.sigma_yy;
  } else if (pair == "ex") {
    cross = &spec.sigma_xe;
    scalar_var = spec.sigma_ee;
  } else {
    throw GaussianError("ccm: pair must be yx or ex");
  }
  if (scalar_var <= 0.0) throw GaussianError("ccm: scalar variance must be positive");

  const PsdFactorResult white = sym_psd_inv_sqrt(spec.sigma_xx);
  CcmVector out;
  out.source_pair = pair;
  out.rank_deficient = white.rank_deficient;
  out.entries = white.m.mul(*cross);
  const double scale = 1.0 / std::sqrt(scalar_var);
  for (double& v : out.entries) v *= scale;
  return out;
}

double dbar_divergence(const SymMatrix& sigma_v, const SymMatrix& sigma_w) {
  if (sigma_v.dim() != sigma_w.dim()) throw GaussianError("dbar: dimension mismatch");
  const PsdFactorResult white = sym_psd_inv_sqrt(sigma_w);
  if (white.rank_deficient) throw GaussianError("dbar: reference covariance is singular");
  SymMatrix diff(sigma_v.dim());
  for (int i = 0; i < diff.dim(); ++i)
    for (int j = 0; j < diff.dim(); ++j) diff.at(i, j) = sigma_v(i, j) - sigma_w(i, j);
  const SymMatrix inner = white.m.mul_sym(diff).mul_sym(white.m);
  double fro2 = 0.0;
  for (int i = 0; i < inner.dim(); ++i)
    for (int j = 0; j < inner.dim(); ++j) fro2 += inner(i, j) * inner(i, j);
  return 0.5 * fro2;
}

double independence_dbar(const SymMatrix& joint_eu) {
  if (joint_eu.dim() != 2) throw GaussianError("independence_dbar: needs a 2x2 joint");
  SymMatrix product(2);
  product.at(0, 0) = joint_eu(0, 0);
  product.at(1, 1) = joint_eu(1, 1);
  return dbar_divergence(joint_eu, product);
}

ObjectiveMse objective_and_mse(const std::vector<double>& a, const JointGaussianSpec& spec) {
  const CcmVector byx = ccm(spec, "yx");
  if (a.size() != byx.entries.size()) throw GaussianError("objective_and_mse: dimension mismatch");
  ObjectiveMse out;
  const double inner = dot(a, byx.entries);
  out.objective = inner * inner;
  out.mse = spec.sigma_yy * (1.0 - out.objective);
  return out;
}

std::vector<double> synthesize_predictor(const std::vector<double>& a, const JointGaussianSpec& spec) {
  if (static_cast<int>(a.size()) != spec.dim_x()) throw GaussianError("synthesize_predictor: dimension mismatch");
  return sym_psd_inv_sqrt(spec.sigma_xx).m.mul(a);
}

}  // namespace fairq
