#include "l1ksvd/rng.hpp"
#include "l1ksvd/sparse_coding.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <set>

using namespace l1ksvd;

namespace {

struct SmallInstance {
  Dictionary dict;
  Vector y;
};

SmallInstance small_instance(std::uint64_t seed) {
  Rng rng(RngSeed{seed});
  Dictionary d(gaussian_matrix(rng, 2, 3));
  Vector y = 0.7 * gaussian_matrix(rng, 2, 1).col(0);
  return {std::move(d), std::move(y)};
}

}  // namespace

TEST_CASE("irls: zero signal codes to zero") {
  Rng rng(RngSeed{1});
  const Dictionary d(gaussian_matrix(rng, 6, 10));
  const Vector x = irls_sparse_code(Vector::Zero(6), d, 1.0);
  CHECK(x.cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("irls: vanishing penalty on an identity dictionary reproduces the signal") {
  const Dictionary d(Matrix::Identity(2, 2));
  const Vector x = irls_sparse_code(Vector{{2.0, 0.0}}, d, 1e-6);
  CHECK(std::abs(x(0) - 2.0) <= 1e-4);
  CHECK(std::abs(x(1)) <= 1e-4);
}

TEST_CASE("irls: matches a grid-search oracle on 2x3 instances") {
  for (std::uint64_t seed = 100; seed < 105; ++seed) {
    const auto inst = small_instance(seed);
    const double lambda = 0.1;
    const Vector x = irls_sparse_code(inst.y, inst.dict, lambda);
    const double got = oracle::l1_objective(inst.y, inst.dict.atoms(), x, lambda);
    const double grid = oracle::grid_min_3d(inst.y, inst.dict.atoms(), lambda, -2.0, 2.0, 0.005);
    CAPTURE(seed);
    CHECK(std::abs(got - grid) <= 1e-2);
  }
}

TEST_CASE("irls: smoothed objective is non-increasing after the first step") {
  Rng rng(RngSeed{11});
  const Dictionary d(gaussian_matrix(rng, 16, 32));
  for (int trial = 0; trial < 10; ++trial) {
    const Vector y = gaussian_matrix(rng, 16, 1).col(0);
    IrlsParams p;
    p.rel_tol = 0.0;
    p.max_inner_iters = 40;
    const IrlsResult r = irls_sparse_code_detailed(y, d, 0.3, p, Vector::Zero(32));
    REQUIRE(r.x.allFinite());
    for (std::size_t i = 2; i < r.objective_trace.size(); ++i) {
      CAPTURE(i);
      CHECK(r.objective_trace[i] <= r.objective_trace[i - 1] * (1.0 + 1e-6) + 1e-12);
    }
  }
}

TEST_CASE("irls: rejects bad inputs") {
  const Dictionary d(Matrix::Identity(3, 3));
  CHECK_THROWS_AS(irls_sparse_code(Vector::Ones(3), d, 0.0), InvalidArgument);
  CHECK_THROWS_AS(irls_sparse_code(Vector::Ones(2), d, 1.0), InvalidArgument);
  Vector bad = Vector::Ones(3);
  bad(1) = std::nan("");
  CHECK_THROWS_AS(irls_sparse_code(bad, d, 1.0), InvalidArgument);
  IrlsParams p;
  p.max_inner_iters = 0;
  CHECK_THROWS_AS(irls_sparse_code(Vector::Ones(3), d, 1.0, p), InvalidArgument);
}

TEST_CASE("constrained: inactive constraint keeps the unconstrained fit") {
  const auto inst = small_instance(7);
  const Vector x_ls = irls_sparse_code(inst.y, inst.dict, kLambdaMin);
  const double tau = x_ls.lpNorm<1>() * 1.5 + 1.0;
  const ConstrainedResult r = irls_sparse_code_constrained(inst.y, inst.dict, tau);
  CHECK(r.x.lpNorm<1>() <= tau);
  const Matrix& d = inst.dict.atoms();
  CHECK((inst.y - d * r.x).lpNorm<1>() <= (inst.y - d * x_ls).lpNorm<1>() + 1e-6);
}

TEST_CASE("constrained: tiny radius gives a near-zero code") {
  const auto inst = small_instance(8);
  const ConstrainedResult r = irls_sparse_code_constrained(inst.y, inst.dict, 1e-9);
  CHECK(r.x.lpNorm<1>() <= 1e-9);
  CHECK((inst.y - inst.dict.atoms() * r.x).lpNorm<1>() == doctest::Approx(inst.y.lpNorm<1>()).epsilon(1e-6));
}

TEST_CASE("constrained: matches a grid oracle restricted to the l1 ball") {
  for (std::uint64_t seed = 200; seed < 205; ++seed) {
    auto inst = small_instance(seed);
    inst.y *= 3.0;  // make the unit ball binding
    const double tau = 1.0;
    const Matrix& d = inst.dict.atoms();
    CAPTURE(seed);
    // A tight stopping window reaches the boundary of the ball.
    const ConstrainedResult tight = irls_sparse_code_constrained(inst.y, inst.dict, tau, {}, std::nullopt, 0.999);
    CHECK(tight.x.lpNorm<1>() <= tau + 1e-6);
    const double grid = oracle::grid_min_3d(inst.y, d, 0.0, -1.0, 1.0, 0.005, tau);
    CHECK(std::abs((inst.y - d * tight.x).lpNorm<1>() - grid) <= 1e-2);
    // The default window may stop inside the ball; the answer is then optimal
    // for the radius it reached.
    const ConstrainedResult loose = irls_sparse_code_constrained(inst.y, inst.dict, tau);
    const double reached = loose.x.lpNorm<1>();
    CHECK(reached <= tau);
    if (tight.lambda > kLambdaMin) CHECK(reached >= 0.95 * tau);
    const double own = oracle::grid_min_3d(inst.y, d, 0.0, -1.0, 1.0, 0.005, reached);
    CHECK((inst.y - d * loose.x).lpNorm<1>() <= own + 1e-2);
  }
  CHECK_THROWS_AS(irls_sparse_code_constrained(Vector::Ones(2), Dictionary(Matrix::Identity(2, 2)), 1.0, {},
                                               std::nullopt, 0.0),
                  InvalidArgument);
}

TEST_CASE("constrained: a lambda hint gives the same kind of answer") {
  Rng rng(RngSeed{5});
  const Dictionary d(gaussian_matrix(rng, 20, 50));
  const Vector y = gaussian_matrix(rng, 20, 1).col(0);
  const double tau = 1.5;
  const ConstrainedResult cold = irls_sparse_code_constrained(y, d, tau);
  REQUIRE(cold.bracketed);
  for (double hint : {cold.lambda, cold.lambda * 10.0, cold.lambda / 30.0}) {
    const ConstrainedResult warm = irls_sparse_code_constrained(y, d, tau, {}, hint);
    CAPTURE(hint);
    CHECK(warm.bracketed);
    CHECK(warm.x.lpNorm<1>() <= tau);
    CHECK(warm.x.lpNorm<1>() >= 0.95 * tau);
  }
}

TEST_CASE("omp: a single atom is found exactly") {
  Rng rng(RngSeed{21});
  const Dictionary d(gaussian_matrix(rng, 20, 50));
  const Vector x = omp(d.atom(3), d, Sparsity{1});
  CHECK(support_of_row(x.transpose(), 0) == Support{3});
  CHECK(std::abs(x(3) - 1.0) <= 1e-12);
}

TEST_CASE("omp: orthonormal dictionary recovers both coefficients") {
  Rng rng(RngSeed{22});
  const Matrix q = gaussian_matrix(rng, 6, 6).householderQr().householderQ();
  const Dictionary d(q);
  const Vector y = 2.0 * d.atom(0) + 3.0 * d.atom(1);
  const Vector x = omp(y, d, Sparsity{2});
  CHECK(std::abs(x(0) - 2.0) <= 1e-12);
  CHECK(std::abs(x(1) - 3.0) <= 1e-12);
  CHECK(x.tail(4).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("omp: matches exhaustive best-3-subset on 20x50 instances") {
  for (std::uint64_t seed = 300; seed < 305; ++seed) {
    Rng rng(RngSeed{seed});
    const Dictionary d(gaussian_matrix(rng, 20, 50));
    const auto perm = random_permutation(rng, 50);
    Vector x_true = Vector::Zero(50);
    for (int i = 0; i < 3; ++i) x_true(perm[static_cast<std::size_t>(i)]) = rng.normal();
    const Vector y = d.atoms() * x_true;
    const Vector x = omp(y, d, Sparsity{3});
    const auto best = oracle::best_three_subset(y, d.atoms());
    std::set<Index> got;
    for (Index j = 0; j < 50; ++j)
      if (x(j) != 0.0) got.insert(j);
    const std::set<Index> want(best.support.begin(), best.support.end());
    CAPTURE(seed);
    CHECK(static_cast<Index>(got.size()) <= 3);
    CHECK((got == want || (y - d.atoms() * x).norm() <= best.residual + 1e-9));
  }
}

TEST_CASE("omp: residual stop meets its bound or fills the support") {
  Rng rng(RngSeed{31});
  const Dictionary d(gaussian_matrix(rng, 12, 30));
  for (int t = 0; t < 20; ++t) {
    const Vector y = gaussian_matrix(rng, 12, 1).col(0);
    const double r = 0.3 * y.norm();
    const Vector x = omp(y, d, ResidualNorm{r});
    const Index nnz = (x.array() != 0.0).count();
    CHECK(((y - d.atoms() * x).norm() <= r || nnz == 12));
  }
  const Vector y = gaussian_matrix(rng, 12, 1).col(0);
  const Vector x = omp(y, d, ResidualNorm{0.0});
  CHECK((x.array() != 0.0).count() == 12);
}

TEST_CASE("omp: ties go to the lowest index") {
  Matrix a(2, 3);
  a << 1, 0, 1,
       0, 1, 0;
  const Dictionary d(a);
  const Vector x = omp(Vector{{1.0, 0.0}}, d, Sparsity{1});
  CHECK(x(0) == doctest::Approx(1.0));
  CHECK(x(2) == 0.0);
}

TEST_CASE("omp_batch agrees with per-column omp") {
  Rng rng(RngSeed{41});
  const Dictionary d(gaussian_matrix(rng, 10, 20));
  const Matrix y = gaussian_matrix(rng, 10, 15);
  const Matrix x = omp_batch(y, d, Sparsity{4});
  for (Index n = 0; n < y.cols(); ++n) CHECK(x.col(n) == omp(y.col(n), d, Sparsity{4}));
  CHECK_THROWS_AS(omp(y.col(0), d, Sparsity{11}), InvalidArgument);
}

TEST_CASE("prune: zero threshold is a no-op") {
  Rng rng(RngSeed{51});
  const Matrix x = gaussian_matrix(rng, 5, 7);
  CHECK(prune(x, AbsoluteThreshold{0.0}) == x);
}

TEST_CASE("prune: keep fraction keeps the largest entry per column") {
  Matrix x(2, 2);
  x << 1, 0.1,
       0.2, 2;
  Matrix want(2, 2);
  want << 1, 0,
          0, 2;
  CHECK(prune(x, KeepFraction{0.5}) == want);
}

TEST_CASE("prune: keep fraction keeps exactly ceil(n_p K) and breaks ties by lower index") {
  Rng rng(RngSeed{52});
  const Matrix x = gaussian_matrix(rng, 128, 40);
  for (double np : {0.04, 0.05, 0.08, 0.15, 0.18, 1.0}) {
    const Matrix p = prune(x, KeepFraction{np});
    const auto keep = static_cast<Index>(std::ceil(np * 128 - 1e-9));
    for (Index n = 0; n < x.cols(); ++n) CHECK((p.col(n).array() != 0.0).count() == keep);
  }
  CHECK(kept_per_column(0.07, 100) == 7);
  Matrix tie(4, 1);
  tie << 1, -1, 1, 0.5;
  const Matrix p = prune(tie, KeepFraction{0.5});
  CHECK(p(0, 0) == 1.0);
  CHECK(p(1, 0) == -1.0);
  CHECK(p(2, 0) == 0.0);
}

TEST_CASE("prune: survivors of an absolute threshold all clear it") {
  Rng rng(RngSeed{53});
  const Matrix x = gaussian_matrix(rng, 50, 1500);
  const double t0 = 0.03 * x.norm();
  const Matrix p = prune(x, AbsoluteThreshold{t0});
  for (Index j = 0; j < p.cols(); ++j)
    for (Index i = 0; i < p.rows(); ++i) {
      if (p(i, j) != 0.0) {
        CHECK(std::abs(p(i, j)) >= t0);
        CHECK(p(i, j) == x(i, j));
      } else {
        CHECK(std::abs(x(i, j)) < t0);
      }
    }
  CHECK_THROWS_AS(prune(x, KeepFraction{0.0}), InvalidArgument);
  CHECK_THROWS_AS(prune(x, AbsoluteThreshold{-1.0}), InvalidArgument);
}
