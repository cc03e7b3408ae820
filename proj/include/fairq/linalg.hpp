#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace fairq {

struct LinalgError : std::runtime_error {
  explicit LinalgError(const std::string& what) : std::runtime_error(what) {}
};

// Dense symmetric matrix for small dimensions (covariance blocks and the
// assembled joint covariance; nothing here is meant for large n).
class SymMatrix {
 public:
  SymMatrix() : dim_(0) {}
  explicit SymMatrix(int dim) : dim_(dim), a_(static_cast<size_t>(dim) * dim, 0.0) {}

  static SymMatrix identity(int dim);
  static SymMatrix diagonal(const std::vector<double>& d);
  // Validates symmetry (tolerance 1e-12) and symmetrizes exactly.
  static SymMatrix from_rows(const std::vector<std::vector<double>>& rows);

  int dim() const { return dim_; }
  double operator()(int i, int j) const { return a_[static_cast<size_t>(i) * dim_ + j]; }
  double& at(int i, int j) { return a_[static_cast<size_t>(i) * dim_ + j]; }

  std::vector<double> mul(const std::vector<double>& v) const;
  SymMatrix mul_sym(const SymMatrix& other) const;  // result assumed symmetric
  double max_asymmetry() const;

 private:
  int dim_;
  std::vector<double> a_;
};

struct SymEigen {
  std::vector<double> values;          // ascending
  std::vector<std::vector<double>> vectors;  // vectors[k] is the k-th eigenvector
};

// Cyclic Jacobi; fine for the dims used here (<= 8).
SymEigen eigen_sym(const SymMatrix& m);

double min_eigenvalue(const SymMatrix& m);
double spectral_norm(const SymMatrix& m);

// Eigenvalues below this are treated as exactly zero when inverting or
// factoring: finite-sample covariance estimates can be marginally indefinite.
inline constexpr double kPsdClampEps = 1e-10;

struct PsdFactorResult {
  SymMatrix m;
  bool rank_deficient = false;
};

// Pseudo-inverse square root R with R*m*R = I on the range of m.
PsdFactorResult sym_psd_inv_sqrt(const SymMatrix& m);

// Square root S with S*S = m (eigenvalues clamped at kPsdClampEps).
PsdFactorResult sym_psd_sqrt(const SymMatrix& m);

// Lower-triangular factor L with L*L^T = m; falls back to the eigen factor
// when the matrix is semidefinite. Returned as dense row-major dim x dim.
std::vector<double> psd_factor(const SymMatrix& m);

double dot(const std::vector<double>& a, const std::vector<double>& b);
double norm2(const std::vector<double>& a);

}  // namespace fairq
