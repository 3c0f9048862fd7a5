#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "one/numerics.hpp"
#include "test_support.hpp"

namespace {

using one::DenseMatrix;
using one::Rng;
using one::SparseMatrix;

double reconstruction_rel_error(const DenseMatrix& m, const one::SvdResult& s) {
  const std::size_t n = m.rows();
  double err = 0.0, norm = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double v = 0.0;
      for (std::size_t c = 0; c < n; ++c) v += s.x(i, c) * s.sigma[c] * s.y(j, c);
      err += (v - m(i, j)) * (v - m(i, j));
      norm += m(i, j) * m(i, j);
    }
  return norm > 0 ? std::sqrt(err / norm) : std::sqrt(err);
}

void expect_svd_contract(const DenseMatrix& m, const one::SvdResult& s) {
  EXPECT_LT(one::orthogonality_error(s.x), 1e-9);
  EXPECT_LT(one::orthogonality_error(s.y), 1e-9);
  for (std::size_t c = 0; c < s.sigma.size(); ++c) {
    EXPECT_GE(s.sigma[c], 0.0);
    if (c > 0) {
      EXPECT_LE(s.sigma[c], s.sigma[c - 1]);
    }
  }
  EXPECT_LT(reconstruction_rel_error(m, s), 1e-8);
}

TEST(Rng, SameSeedSameStream) {
  Rng a(42), b(42);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(a.next_u64(), b.next_u64());
  // mt19937_64 reference: 10000th output for default seed 5489 is fixed by the standard.
  std::mt19937_64 ref;
  ref.discard(9999);
  Rng c(5489);
  for (int i = 0; i < 9999; ++i) c.next_u64();
  EXPECT_EQ(c.next_u64(), ref());
}

TEST(Rng, UniformRangesAndDerivedStreamsDiffer) {
  Rng r(7);
  for (int i = 0; i < 10000; ++i) {
    const double u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    ASSERT_LT(r.uniform_index(13), 13u);
  }
  EXPECT_NE(Rng::derive_seed(1, "init"), Rng::derive_seed(1, "kmeans"));
  EXPECT_EQ(Rng::derive_seed(1, "init"), Rng::derive_seed(1, "init"));
  EXPECT_THROW(r.uniform_index(0), one::DomainError);
}

TEST(SparseMatrix, RejectsDuplicatesAndOutOfRange) {
  EXPECT_THROW(SparseMatrix::from_triplets(2, 2, {{0, 0, 1.0}, {0, 0, 2.0}}), one::DomainError);
  EXPECT_THROW(SparseMatrix::from_triplets(2, 2, {{2, 0, 1.0}}), one::DimensionError);
  EXPECT_THROW(SparseMatrix::from_triplets(2, 2, {{0, 1, 0.0}}), one::DomainError);
  auto m = SparseMatrix::from_triplets(2, 3, {{1, 2, 4.0}, {0, 1, 3.0}});
  EXPECT_EQ(m.nnz(), 2u);
  EXPECT_EQ(m.at(1, 2), 4.0);
  EXPECT_EQ(m.at(1, 1), 0.0);
  EXPECT_EQ(SparseMatrix::from_dense(m.to_dense()), m);
}

TEST(SvdSmall, Identity) {
  const auto s = one::svd_small(DenseMatrix::identity(3));
  for (double v : s.sigma) EXPECT_DOUBLE_EQ(v, 1.0);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) {
      EXPECT_DOUBLE_EQ(s.x(i, j), i == j ? 1.0 : 0.0);
      EXPECT_DOUBLE_EQ(s.y(i, j), i == j ? 1.0 : 0.0);
    }
}

TEST(SvdSmall, DiagonalGivesSignedPermutations) {
  const DenseMatrix m{{2.0, 0.0}, {0.0, 3.0}};
  const auto s = one::svd_small(m);
  EXPECT_DOUBLE_EQ(s.sigma[0], 3.0);
  EXPECT_DOUBLE_EQ(s.sigma[1], 2.0);
  for (const DenseMatrix* q : {&s.x, &s.y})
    for (std::size_t i = 0; i < 2; ++i) {
      int nonzero = 0;
      for (std::size_t j = 0; j < 2; ++j) {
        const double a = std::abs((*q)(i, j));
        EXPECT_TRUE(a == 0.0 || a == 1.0);
        nonzero += a == 1.0;
      }
      EXPECT_EQ(nonzero, 1);
    }
  expect_svd_contract(m, s);
}

TEST(SvdSmall, RandomReconstructionAndEigenCrossCheck) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    const std::size_t n = 1 + seed % 8;
    DenseMatrix m(n, n);
    for (double& v : m.data()) v = rng.normal();
    const auto s = one::svd_small(m);
    expect_svd_contract(m, s);

    // sigma^2 against eigenvalues of M^T M from an independent Jacobi eigen-solver.
    auto eig = testing_support::symmetric_eigenvalues(one::matmul_tn(m, m));
    std::sort(eig.begin(), eig.end(), std::greater<>());
    for (std::size_t c = 0; c < n; ++c)
      EXPECT_NEAR(s.sigma[c] * s.sigma[c], std::max(eig[c], 0.0), 1e-9 * std::max(1.0, eig[0]));
  }
}

TEST(SvdSmall, RankDeficientStillOrthogonal) {
  const DenseMatrix m{{1.0, 2.0, 3.0}, {2.0, 4.0, 6.0}, {0.0, 0.0, 0.0}};
  const auto s = one::svd_small(m);
  expect_svd_contract(m, s);
  EXPECT_NEAR(s.sigma[1], 0.0, 1e-12);
  EXPECT_NEAR(s.sigma[2], 0.0, 1e-12);
  const auto z = one::svd_small(DenseMatrix(4, 4));
  expect_svd_contract(DenseMatrix(4, 4), z);
}

TEST(SvdSmall, SignConventionAndDeterminism) {
  Rng rng(3);
  DenseMatrix m(5, 5);
  for (double& v : m.data()) v = rng.normal();
  const auto a = one::svd_small(m);
  const auto b = one::svd_small(m);
  EXPECT_EQ(a.x, b.x);
  EXPECT_EQ(a.y, b.y);
  EXPECT_EQ(a.sigma, b.sigma);
  for (std::size_t c = 0; c < 5; ++c) {
    std::size_t arg = 0;
    for (std::size_t i = 1; i < 5; ++i)
      if (std::abs(a.x(i, c)) > std::abs(a.x(arg, c))) arg = i;
    EXPECT_GT(a.x(arg, c), 0.0);
  }
}

TEST(SvdSmall, RejectsBadInput) {
  EXPECT_THROW(one::svd_small(DenseMatrix(2, 3)), one::DimensionError);
  DenseMatrix bad(2, 2);
  bad(0, 0) = std::nan("");
  EXPECT_THROW(one::svd_small(bad), one::DomainError);
}

TEST(FrobeniusResidual, TrivialCases) {
  const DenseMatrix p{{1.0, 2.0}, {0.5, -1.0}};
  const DenseMatrix q{{1.0, 0.0, 2.0}, {3.0, 1.0, -1.0}};
  EXPECT_DOUBLE_EQ(one::frobenius_sq_residual(one::matmul(p, q), p, q), 0.0);
  EXPECT_DOUBLE_EQ(one::frobenius_sq_residual(DenseMatrix{{2.0}}, DenseMatrix{{1.0}}, DenseMatrix{{1.0}}), 1.0);
  EXPECT_THROW(one::frobenius_sq_residual(DenseMatrix(2, 2), DenseMatrix(2, 1), DenseMatrix(2, 2)),
               one::DimensionError);
}

TEST(FrobeniusResidual, MatchesTripleLoop) {
  Rng rng(11);
  DenseMatrix m(5, 4), p(5, 3), q(3, 4);
  for (double& v : m.data()) v = rng.normal();
  for (double& v : p.data()) v = rng.normal();
  for (double& v : q.data()) v = rng.normal();
  double naive = 0.0;
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 4; ++j) {
      double pq = 0.0;
      for (std::size_t l = 0; l < 3; ++l) pq += p(i, l) * q(l, j);
      naive += (m(i, j) - pq) * (m(i, j) - pq);
    }
  EXPECT_NEAR(one::frobenius_sq_residual(m, p, q), naive, 1e-12);
  EXPECT_NEAR(one::frobenius_sq_residual(SparseMatrix::from_dense(m), p, q), naive, 1e-12);
}

TEST(NmfInit, RankOneRecovery) {
  Rng gen(5);
  const std::size_t rows = 12, cols = 9;
  std::vector<double> a(rows), b(cols);
  for (double& v : a) v = gen.uniform(0.5, 2.0);
  for (double& v : b) v = gen.uniform(0.5, 2.0);
  DenseMatrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = a[i] * b[j];
  Rng rng(1);
  const auto f = one::nmf_init(m, 1, 200, rng);
  const double rel = std::sqrt(one::frobenius_sq_residual(m, f.p, f.q)) /
                     std::sqrt(one::frobenius_sq_residual(m, DenseMatrix(rows, 1), DenseMatrix(1, cols)));
  EXPECT_LT(rel, 1e-3);
}

TEST(NmfInit, ZeroMatrixAndMonotoneTrace) {
  Rng rng(2);
  const auto z = one::nmf_init(DenseMatrix(6, 5), 2, 20, rng, true);
  EXPECT_EQ(one::frobenius_sq_residual(DenseMatrix(6, 5), z.p, z.q), 0.0);

  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng data(seed + 100);
    DenseMatrix m(15, 20);
    for (double& v : m.data()) v = data.bernoulli(0.3) ? data.uniform(0.0, 3.0) : 0.0;
    Rng init(seed);
    const auto f = one::nmf_init(SparseMatrix::from_dense(m), 4, 100, init, true);
    ASSERT_EQ(f.error_trace.size(), 100u);
    for (std::size_t s = 1; s < f.error_trace.size(); ++s)
      EXPECT_LE(f.error_trace[s], f.error_trace[s - 1] * (1 + 1e-12) + 1e-12) << "sweep " << s;
    for (double v : f.p.data()) EXPECT_GE(v, 0.0);
    for (double v : f.q.data()) EXPECT_GE(v, 0.0);
    // Trace formula against the direct residual.
    EXPECT_NEAR(f.error_trace.back(), one::frobenius_sq_residual(m, f.p, f.q), 1e-9);
  }
}

TEST(NmfInit, DeterministicAndDenseSparseAgree) {
  Rng data(9);
  DenseMatrix m(10, 8);
  for (double& v : m.data()) v = data.bernoulli(0.5) ? data.uniform() : 0.0;
  Rng r1(4), r2(4);
  const auto a = one::nmf_init(m, 3, 50, r1);
  const auto b = one::nmf_init(SparseMatrix::from_dense(m), 3, 50, r2);
  EXPECT_EQ(a.p, b.p);
  EXPECT_EQ(a.q, b.q);
}

TEST(NmfInit, Errors) {
  Rng rng(0);
  EXPECT_THROW(one::nmf_init(DenseMatrix{{1.0, -1.0}, {0.0, 1.0}}, 1, 5, rng), one::DomainError);
  EXPECT_THROW(one::nmf_init(DenseMatrix(3, 3), 0, 5, rng), one::DimensionError);
  EXPECT_THROW(one::nmf_init(DenseMatrix(3, 3), 4, 5, rng), one::DimensionError);
  EXPECT_THROW(one::nmf_init(DenseMatrix(3, 3), 1, 0, rng), one::DomainError);
}

TEST(NmfInit, CiteseerShapedInputStaysFinite) {
  // 3477 x 3703 binary bag-of-words with ~32 keywords per node, K = 18.
  Rng data(17);
  std::vector<one::Triplet> t;
  for (std::size_t i = 0; i < 3477; ++i) {
    std::vector<std::size_t> cols;
    while (cols.size() < 32) {
      const std::size_t c = data.uniform_index(3703);
      if (std::find(cols.begin(), cols.end(), c) == cols.end()) cols.push_back(c);
    }
    for (std::size_t c : cols) t.push_back({i, c, 1.0});
  }
  const auto m = SparseMatrix::from_triplets(3477, 3703, std::move(t));
  Rng rng(1);
  const auto f = one::nmf_init(m, 18, 10, rng, true);
  EXPECT_TRUE(f.p.all_finite());
  EXPECT_TRUE(f.q.all_finite());
  EXPECT_LT(f.error_trace.back(), static_cast<double>(m.nnz()));
}

}  // namespace
