#include "l1ksvd/rng.hpp"
#include "l1ksvd/types.hpp"

#include <doctest.h>

#include <algorithm>
#include <set>

using namespace l1ksvd;

TEST_CASE("normalize_columns scales a 3-4-5 column") {
  Matrix m(2, 1);
  m << 3, 4;
  const Matrix n = normalize_columns(m);
  CHECK(n(0, 0) == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(n(1, 0) == doctest::Approx(0.8).epsilon(1e-15));
}

TEST_CASE("normalize_columns leaves the identity alone") {
  const Matrix eye = Matrix::Identity(5, 5);
  CHECK(normalize_columns(eye) == eye);
}

TEST_CASE("normalize_columns on a Gaussian matrix gives unit columns and is idempotent") {
  Rng rng(RngSeed{42});
  const Matrix g = gaussian_matrix(rng, 20, 50);
  const Matrix n = normalize_columns(g);
  for (Index j = 0; j < n.cols(); ++j) CHECK(std::abs(n.col(j).norm() - 1.0) <= 1e-12);
  CHECK((normalize_columns(n) - n).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("normalize_columns names the zero column") {
  Matrix m = Matrix::Ones(3, 4);
  m.col(2).setZero();
  try {
    normalize_columns(m);
    FAIL("expected an exception");
  } catch (const InvalidArgument& e) {
    CHECK(std::string(e.what()).find("column 2") != std::string::npos);
  }
}

TEST_CASE("Dictionary keeps unit-norm atoms") {
  Rng rng(RngSeed{7});
  Dictionary d(gaussian_matrix(rng, 8, 12) * 3.0);
  for (Index j = 0; j < d.atom_count(); ++j) CHECK(std::abs(d.atom(j).norm() - 1.0) <= 1e-12);
  d.set_atom(3, Vector::Constant(8, -2.0));
  CHECK(std::abs(d.atom(3).norm() - 1.0) <= 1e-12);
  CHECK(d.atom(3)(0) < 0.0);
  CHECK_THROWS_AS(d.set_atom(1, Vector::Zero(8)), InvalidArgument);
  CHECK_THROWS_AS(Dictionary(Matrix(0, 3)), InvalidArgument);
}

TEST_CASE("support_of_row lists increasing nonzero indices") {
  Matrix x = Matrix::Zero(2, 6);
  x(1, 4) = -1;
  x(1, 0) = 2;
  x(1, 5) = 1e-300;
  CHECK(support_of_row(x, 1) == Support{0, 4, 5});
  CHECK(support_of_row(x, 0).empty());
}

TEST_CASE("median_abs") {
  Matrix a(1, 4);
  a << -4, 1, 3, -2;
  CHECK(median_abs(a) == doctest::Approx(2.5));
  Matrix b(3, 1);
  b << -7, 0.5, 2;
  CHECK(median_abs(b) == 2.0);
  CHECK(median_abs(Matrix(0, 0)) == 0.0);
}

TEST_CASE("Rng streams are reproducible and independent") {
  Rng a(RngSeed{123}), b(RngSeed{123}), c(RngSeed{124});
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u64();
    CHECK(x == b.next_u64());
    differs |= x != c.next_u64();
  }
  CHECK(differs);

  const Rng root(RngSeed{9});
  Rng s1 = root.split(1), s1b = root.split(1), s2 = root.split(2);
  CHECK(s1.next_u64() == s1b.next_u64());
  CHECK(s1.next_u64() != s2.next_u64());
  CHECK(root.derive_seed(5) == root.derive_seed(5));
  CHECK(!(root.derive_seed(5) == root.derive_seed(6)));
}

TEST_CASE("Rng uniform stays in the open unit interval with the right mean") {
  Rng rng(RngSeed{1});
  double sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  CHECK(std::abs(sum / n - 0.5) < 0.005);
}

TEST_CASE("Rng normal has unit variance") {
  Rng rng(RngSeed{2});
  double s = 0.0, ss = 0.0;
  const int n = 400000;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    s += z;
    ss += z * z;
  }
  const double mean = s / n;
  CHECK(std::abs(mean) < 0.01);
  CHECK(std::abs(ss / n - mean * mean - 1.0) < 0.01);
}

TEST_CASE("random_permutation is a permutation and uniform_index stays in range") {
  Rng rng(RngSeed{3});
  const auto p = random_permutation(rng, 50);
  std::set<Index> seen(p.begin(), p.end());
  CHECK(seen.size() == 50);
  CHECK(*seen.begin() == 0);
  CHECK(*seen.rbegin() == 49);
  for (int i = 0; i < 1000; ++i) {
    const Index k = rng.uniform_index(7);
    REQUIRE(k >= 0);
    REQUIRE(k < 7);
  }
  CHECK_THROWS_AS(rng.uniform_index(0), InvalidArgument);
}
