#pragma once

#include <cmath>
#include <vector>

#include "fairq/gaussian.hpp"
#include "fairq/rng.hpp"

namespace fairq::test {

// random valid joint covariance via a random factor: F * F^T is always PSD
inline JointGaussianSpec random_spec(Rng& rng, int d) {
  const int n = d + 2;
  std::vector<std::vector<double>> f(static_cast<size_t>(n), std::vector<double>(static_cast<size_t>(n)));
  for (auto& row : f)
    for (double& v : row) v = rng.normal();
  SymMatrix full(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double s = 0.0;
      for (int k = 0; k < n; ++k) s += f[static_cast<size_t>(i)][static_cast<size_t>(k)] * f[static_cast<size_t>(j)][static_cast<size_t>(k)];
      full.at(i, j) = s;
    }
  // keep the scalar variances comfortably positive
  full.at(d, d) += 0.5;
  full.at(d + 1, d + 1) += 0.5;
  for (int i = 0; i < d; ++i) full.at(i, i) += 0.1;
  return JointGaussianSpec::from_full(full);
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double worst = 0.0;
  for (size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

}  // namespace fairq::test
