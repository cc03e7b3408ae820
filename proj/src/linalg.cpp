#include "fairq/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace fairq {

SymMatrix SymMatrix::identity(int dim) {
  SymMatrix m(dim);
  for (int i = 0; i < dim; ++i) m.at(i, i) = 1.0;
  return m;
}

SymMatrix SymMatrix::diagonal(const std::vector<double>& d) {
  SymMatrix m(static_cast<int>(d.size()));
  for (int i = 0; i < m.dim(); ++i) m.at(i, i) = d[static_cast<size_t>(i)];
  return m;
}

SymMatrix SymMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
  const int n = static_cast<int>(rows.size());
  SymMatrix m(n);
  for (int i = 0; i < n; ++i) {
    if (static_cast<int>(rows[static_cast<size_t>(i)].size()) != n)
      throw LinalgError("from_rows: ragged input");
    for (int j = 0; j < n; ++j) m.at(i, j) = rows[static_cast<size_t>(i)][static_cast<size_t>(j)];
  }
  if (m.max_asymmetry() > 1e-12) throw LinalgError("from_rows: matrix not symmetric");
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double v = 0.5 * (m(i, j) + m(j, i));
      m.at(i, j) = v;
      m.at(j, i) = v;
    }
  return m;
}

double SymMatrix::max_asymmetry() const {
  double worst = 0.0;
  for (int i = 0; i < dim_; ++i)
    for (int j = i + 1; j < dim_; ++j)
      worst = std::max(worst, std::abs((*this)(i, j) - (*this)(j, i)));
  return worst;
}

std::vector<double> SymMatrix::mul(const std::vector<double>& v) const {
  std::vector<double> out(static_cast<size_t>(dim_), 0.0);
  for (int i = 0; i < dim_; ++i) {
    double s = 0.0;
    for (int j = 0; j < dim_; ++j) s += (*this)(i, j) * v[static_cast<size_t>(j)];
    out[static_cast<size_t>(i)] = s;
  }
  return out;
}

SymMatrix SymMatrix::mul_sym(const SymMatrix& other) const {
  SymMatrix out(dim_);
  for (int i = 0; i < dim_; ++i)
    for (int j = 0; j < dim_; ++j) {
      double s = 0.0;
      for (int k = 0; k < dim_; ++k) s += (*this)(i, k) * other(k, j);
      out.at(i, j) = s;
    }
  return out;
}

SymEigen eigen_sym(const SymMatrix& m) {
  const int n = m.dim();
  std::vector<std::vector<double>> a(static_cast<size_t>(n), std::vector<double>(static_cast<size_t>(n)));
  std::vector<std::vector<double>> v(static_cast<size_t>(n), std::vector<double>(static_cast<size_t>(n), 0.0));
  for (int i = 0; i < n; ++i) {
    v[static_cast<size_t>(i)][static_cast<size_t>(i)] = 1.0;
    for (int j = 0; j < n; ++j) a[static_cast<size_t>(i)][static_cast<size_t>(j)] = m(i, j);
  }

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off += a[static_cast<size_t>(p)][static_cast<size_t>(q)] * a[static_cast<size_t>(p)][static_cast<size_t>(q)];
    if (off < 1e-30) break;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = a[static_cast<size_t>(p)][static_cast<size_t>(q)];
        if (std::abs(apq) < 1e-300) continue;
        const double app = a[static_cast<size_t>(p)][static_cast<size_t>(p)];
        const double aqq = a[static_cast<size_t>(q)][static_cast<size_t>(q)];
        const double theta = 0.5 * (aqq - app) / apq;
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = a[static_cast<size_t>(k)][static_cast<size_t>(p)];
          const double akq = a[static_cast<size_t>(k)][static_cast<size_t>(q)];
          a[static_cast<size_t>(k)][static_cast<size_t>(p)] = c * akp - s * akq;
          a[static_cast<size_t>(k)][static_cast<size_t>(q)] = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = a[static_cast<size_t>(p)][static_cast<size_t>(k)];
          const double aqk = a[static_cast<size_t>(q)][static_cast<size_t>(k)];
          a[static_cast<size_t>(p)][static_cast<size_t>(k)] = c * apk - s * aqk;
          a[static_cast<size_t>(q)][static_cast<size_t>(k)] = s * apk + c * aqk;
        }
        for (int k = 0; k < n; ++k) {
          const double vkp = v[static_cast<size_t>(k)][static_cast<size_t>(p)];
          const double vkq = v[static_cast<size_t>(k)][static_cast<size_t>(q)];
          v[static_cast<size_t>(k)][static_cast<size_t>(p)] = c * vkp - s * vkq;
          v[static_cast<size_t>(k)][static_cast<size_t>(q)] = s * vkp + c * vkq;
        }
      }
    }
  }

  SymEigen out;
  std::vector<int> order(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) order[static_cast<size_t>(i)] = i;
  std::sort(order.begin(), order.end(), [&](int x, int y) {
    return a[static_cast<size_t>(x)][static_cast<size_t>(x)] < a[static_cast<size_t>(y)][static_cast<size_t>(y)];
  });
  for (int idx : order) {
    out.values.push_back(a[static_cast<size_t>(idx)][static_cast<size_t>(idx)]);
    std::vector<double> col(static_cast<size_t>(n));
    for (int k = 0; k < n; ++k) col[static_cast<size_t>(k)] = v[static_cast<size_t>(k)][static_cast<size_t>(idx)];
    out.vectors.push_back(col);
  }
  return out;
}

double min_eigenvalue(const SymMatrix& m) { return eigen_sym(m).values.front(); }

double spectral_norm(const SymMatrix& m) {
  const SymEigen e = eigen_sym(m);
  double worst = 0.0;
  for (double v : e.values) worst = std::max(worst, std::abs(v));
  return worst;
}

namespace {

PsdFactorResult transform_eigenvalues(const SymMatrix& m, double (*f)(double)) {
  if (m.max_asymmetry() > 1e-12) throw LinalgError("matrix not symmetric");
  const SymEigen e = eigen_sym(m);
  const int n = m.dim();
  PsdFactorResult out;
  out.m = SymMatrix(n);
  bool deficient = false;
  for (int k = 0; k < n; ++k) {
    double lam = e.values[static_cast<size_t>(k)];
    if (lam < -kPsdClampEps) throw LinalgError("matrix not positive semidefinite");
    if (lam < kPsdClampEps) {
      lam = 0.0;
      deficient = true;
    }
    const double w = f(lam);
    const auto& vec = e.vectors[static_cast<size_t>(k)];
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        out.m.at(i, j) += w * vec[static_cast<size_t>(i)] * vec[static_cast<size_t>(j)];
  }
  out.rank_deficient = deficient;
  return out;
}

double inv_sqrt_or_zero(double lam) { return lam > 0.0 ? 1.0 / std::sqrt(lam) : 0.0; }
double sqrt_clamped(double lam) { return lam > 0.0 ? std::sqrt(lam) : 0.0; }

}  // namespace

PsdFactorResult sym_psd_inv_sqrt(const SymMatrix& m) {
  return transform_eigenvalues(m, inv_sqrt_or_zero);
}

PsdFactorResult sym_psd_sqrt(const SymMatrix& m) {
  return transform_eigenvalues(m, sqrt_clamped);
}

std::vector<double> psd_factor(const SymMatrix& m) {
  const int n = m.dim();
  std::vector<double> l(static_cast<size_t>(n) * n, 0.0);
  bool ok = true;
  for (int i = 0; i < n && ok; ++i) {
    for (int j = 0; j <= i; ++j) {
      double s = m(i, j);
      for (int k = 0; k < j; ++k) s -= l[static_cast<size_t>(i) * n + k] * l[static_cast<size_t>(j) * n + k];
      if (i == j) {
        if (s < 1e-12) {
          ok = false;
          break;
        }
        l[static_cast<size_t>(i) * n + j] = std::sqrt(s);
      } else {
        l[static_cast<size_t>(i) * n + j] = s / l[static_cast<size_t>(j) * n + j];
      }
    }
  }
  if (ok) return l;
  // Semidefinite or slightly indefinite input: use the (clamped) eigen factor.
  const SymMatrix s = sym_psd_sqrt(m).m;
  std::vector<double> dense(static_cast<size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) dense[static_cast<size_t>(i) * n + j] = s(i, j);
  return dense;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

}  // namespace fairq
