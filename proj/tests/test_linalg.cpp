#include <doctest.h>

#include <cmath>

#include "fairq/linalg.hpp"
#include "fairq/rng.hpp"

using namespace fairq;

TEST_CASE("inv sqrt of the identity is the identity") {
  const auto r = sym_psd_inv_sqrt(SymMatrix::identity(2));
  CHECK(!r.rank_deficient);
  CHECK(r.m(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.m(1, 1) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(r.m(0, 1)) < 1e-12);
}

TEST_CASE("inv sqrt of a diagonal matrix") {
  const auto r = sym_psd_inv_sqrt(SymMatrix::diagonal({4.0, 9.0}));
  CHECK(r.m(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(r.m(1, 1) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("R * m * R reconstructs the identity") {
  SymMatrix m(2);
  m.at(0, 0) = m.at(1, 1) = 1.0;
  m.at(0, 1) = m.at(1, 0) = 0.1;
  const auto r = sym_psd_inv_sqrt(m);
  const SymMatrix check = r.m.mul_sym(m).mul_sym(r.m);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) CHECK(std::abs(check(i, j) - (i == j ? 1.0 : 0.0)) < 1e-9);
}

TEST_CASE("reconstruction holds for random PSD matrices up to condition 1e6") {
  Rng rng(42);
  for (int rep = 0; rep < 200; ++rep) {
    const int d = 1 + static_cast<int>(rng.below(4));
    // random orthogonal-ish basis from QR-free construction: rotate eigvalues through Jacobi of a random sym
    SymMatrix seed(d);
    for (int i = 0; i < d; ++i)
      for (int j = i; j < d; ++j) seed.at(i, j) = seed.at(j, i) = rng.normal();
    const SymEigen basis = eigen_sym(seed);
    SymMatrix m(d);
    for (int k = 0; k < d; ++k) {
      const double lam = std::pow(10.0, rng.uniform(-3.0, 3.0));  // condition <= 1e6
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
          m.at(i, j) += lam * basis.vectors[static_cast<size_t>(k)][static_cast<size_t>(i)] *
                        basis.vectors[static_cast<size_t>(k)][static_cast<size_t>(j)];
    }
    const auto r = sym_psd_inv_sqrt(m);
    const SymMatrix check = r.m.mul_sym(m).mul_sym(r.m);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) CHECK(std::abs(check(i, j) - (i == j ? 1.0 : 0.0)) < 1e-9);
  }
}

TEST_CASE("rank deficiency is flagged, not fatal") {
  SymMatrix m(2);
  m.at(0, 0) = 1.0;  // second eigenvalue is 0
  const auto r = sym_psd_inv_sqrt(m);
  CHECK(r.rank_deficient);
  CHECK(r.m(0, 0) == doctest::Approx(1.0));
  CHECK(r.m(1, 1) == doctest::Approx(0.0));
}

TEST_CASE("asymmetric input is rejected") {
  CHECK_THROWS_AS(SymMatrix::from_rows({{1.0, 0.2}, {0.1, 1.0}}), LinalgError);
}

TEST_CASE("clearly indefinite input is rejected") {
  SymMatrix m(2);
  m.at(0, 0) = 1.0;
  m.at(1, 1) = -1.0;
  CHECK_THROWS_AS(sym_psd_inv_sqrt(m), LinalgError);
}

TEST_CASE("psd_factor reproduces the matrix") {
  Rng rng(7);
  for (int rep = 0; rep < 50; ++rep) {
    const int d = 2 + static_cast<int>(rng.below(3));
    SymMatrix f(d);
    for (int i = 0; i < d; ++i)
      for (int j = i; j < d; ++j) f.at(i, j) = f.at(j, i) = rng.normal();
    SymMatrix m = f.mul_sym(f);  // f symmetric, so f*f is PSD
    const auto l = psd_factor(m);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        double s = 0.0;
        for (int k = 0; k < d; ++k)
          s += l[static_cast<size_t>(i) * d + k] * l[static_cast<size_t>(j) * d + k];
        CHECK(std::abs(s - m(i, j)) < 1e-9);
      }
  }
}

TEST_CASE("spectral norm of a diagonal matrix") {
  CHECK(spectral_norm(SymMatrix::diagonal({3.0, -7.0, 2.0})) == doctest::Approx(7.0));
}
