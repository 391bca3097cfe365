#include <gtest/gtest.h>

#include "qssvm/halfvec.hpp"
#include "test_support.hpp"

namespace qssvm {
namespace {

using testing::random_symmetric;

TEST(HalfVec, IdentityAndOffDiagonal) {
  EXPECT_EQ(hvec(SymmetricMatrix::from_dense(Matrix::Identity(2, 2))).values(), Eigen::Vector3d(1, 0, 1));
  Matrix a(2, 2);
  a << 0, 1, 1, 0;
  EXPECT_EQ(hvec(SymmetricMatrix::from_dense(a)).values(), Eigen::Vector3d(0, 1, 0));
}

TEST(HalfVec, RoundTrip) {
  std::mt19937_64 eng(1);
  for (Index n = 1; n <= 6; ++n) {
    const SymmetricMatrix a = random_symmetric(eng, n);
    EXPECT_EQ(unhvec(hvec(a)), a);
    const HalfVector h(n, testing::random_vector(eng, half_size(n)));
    EXPECT_EQ(hvec(unhvec(h)), h);
  }
}

TEST(HalfVec, RejectsBadShapes) {
  EXPECT_THROW(HalfVector(3, Vector::Zero(5)), DimensionMismatch);
  EXPECT_THROW(SymmetricMatrix::from_dense(Matrix::Zero(2, 3)), DimensionMismatch);
  Matrix a(2, 2);
  a << 0, 1, 2, 0;
  EXPECT_THROW(SymmetricMatrix::from_dense(a), InvalidArgument);
  EXPECT_THROW(unhvec(Vector(Vector::Zero(4))), DimensionMismatch);
}

TEST(HalfVec, IndexMapMatchesOrdering) {
  const Index n = 5;
  for (Index k = 0; k < half_size(n); ++k) {
    const auto [i, j] = hvec_entry(n, k);
    EXPECT_EQ(hvec_index(n, i, j), k);
    EXPECT_EQ(hvec_index(n, j, i), k);
  }
}

TEST(EliminationMatrix, ThreeByThreeExplicit) {
  Eigen::MatrixXi expected = Eigen::MatrixXi::Zero(6, 9);
  expected(0, 0) = expected(1, 1) = expected(2, 2) = 1;
  expected(3, 4) = expected(4, 5) = 1;
  expected(5, 8) = 1;
  EXPECT_EQ(elimination_matrix(3), expected);
}

TEST(DuplicationMatrix, ThreeByThreeExplicit) {
  Eigen::MatrixXi expected = Eigen::MatrixXi::Zero(9, 6);
  expected(0, 0) = expected(1, 1) = expected(2, 2) = 1;
  expected(3, 1) = expected(4, 3) = expected(5, 4) = 1;
  expected(6, 2) = expected(7, 4) = expected(8, 5) = 1;
  EXPECT_EQ(duplication_matrix(3), expected);
}

TEST(EliminationMatrix, SmallCases) {
  EXPECT_EQ(elimination_matrix(1), Eigen::MatrixXi::Ones(1, 1));
  EXPECT_EQ(duplication_matrix(1), Eigen::MatrixXi::Ones(1, 1));
  // n = 2 keeps vec positions 1, 2, 4 (1-based).
  const Eigen::MatrixXi L = elimination_matrix(2);
  Eigen::MatrixXi expected = Eigen::MatrixXi::Zero(3, 4);
  expected(0, 0) = expected(1, 1) = expected(2, 3) = 1;
  EXPECT_EQ(L, expected);
  EXPECT_THROW(elimination_matrix(0), InvalidArgument);
}

TEST(EliminationMatrix, FullRowRankAndInverseOfDuplication) {
  for (Index n = 1; n <= 8; ++n) {
    const Eigen::MatrixXi L = elimination_matrix(n), D = duplication_matrix(n);
    EXPECT_EQ(L * D, Eigen::MatrixXi::Identity(half_size(n), half_size(n))) << n;
    EXPECT_EQ(Eigen::FullPivLU<Matrix>(L.cast<double>()).rank(), half_size(n));
  }
}

TEST(EliminationMatrix, MapsVecToHvecExactly) {
  std::mt19937_64 eng(2);
  for (int t = 0; t < 200; ++t) {
    const Index n = 1 + t % 8;
    const SymmetricMatrix a = random_symmetric(eng, n);
    EXPECT_EQ(Vector(elimination_matrix(n).cast<double>() * vec(a.dense())), hvec(a).values());
    EXPECT_EQ(Vector(duplication_matrix(n).cast<double>() * hvec(a).values()), vec(a.dense()));
  }
}

TEST(FeatureS, Definition) {
  EXPECT_EQ(feature_s(Eigen::Vector2d(1, 2)), Eigen::Vector3d(0.5, 2, 2));
  EXPECT_EQ(feature_s(Vector::Zero(4)), Vector::Zero(10));
}

TEST(FeatureS, ReproducesQuadraticForm) {
  std::mt19937_64 eng(3);
  for (int t = 0; t < 50; ++t) {
    const SymmetricMatrix W = random_symmetric(eng, 4);
    const Vector x = testing::random_vector(eng, 4);
    const double direct = 0.5 * x.dot(W.dense() * x);
    EXPECT_NEAR(hvec(W).values().dot(feature_s(x)), direct, 1e-12 * (1 + std::abs(direct)));
  }
}

TEST(SampleDesign, UnitVector) {
  Matrix expected(2, 3);
  expected << 1, 0, 0, 0, 1, 0;
  EXPECT_EQ(sample_design_M(Eigen::Vector2d(1, 0)), expected);
  EXPECT_EQ(sample_design_M(Vector::Zero(3)), Matrix::Zero(3, 6));
}

TEST(SampleDesign, MatchesKroneckerConstruction) {
  std::mt19937_64 eng(4);
  for (Index n = 1; n <= 6; ++n) {
    const Vector x = testing::random_vector(eng, n);
    EXPECT_EQ(sample_design_M(x), testing::kronecker_design(x));
  }
}

TEST(SampleDesign, AppliesW) {
  std::mt19937_64 eng(5);
  const SymmetricMatrix W = random_symmetric(eng, 5);
  const Vector x = testing::random_vector(eng, 5);
  EXPECT_LE((sample_design_M(x) * hvec(W).values() - W.dense() * x).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(AssembleDesign, SingleSampleExplicit) {
  Matrix X(2, 2);
  X << 1, 0, 0, 0;
  // The second sample sits at the origin and only contributes to the b block.
  const Dataset d(X, Eigen::Vector2d(1, -1));
  const DesignCache cache = assemble_design(d);
  Matrix H(2, 5);
  H << 1, 0, 0, 1, 0, 0, 1, 0, 0, 1;
  Matrix origin(2, 5);
  origin << 0, 0, 0, 1, 0, 0, 0, 0, 0, 1;
  const Matrix expected = 2.0 * H.transpose() * H + 2.0 * origin.transpose() * origin;
  EXPECT_LE((cache.G() - expected).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(AssembleDesign, AllZeroSamples) {
  const Dataset d(Matrix::Zero(3, 2), Eigen::Vector3d(1, -1, 1));
  Matrix expected = Matrix::Zero(5, 5);
  expected.bottomRightCorner(2, 2) = 6.0 * Matrix::Identity(2, 2);
  EXPECT_EQ(assemble_design(d).G(), expected);
}

TEST(AssembleDesign, MatchesDefinitionAndFeatureLayout) {
  std::mt19937_64 eng(6);
  for (Index n = 1; n <= 5; ++n) {
    const Dataset d = testing::random_dataset(eng, 7, n);
    const DesignCache cache = assemble_design(d);
    const Matrix ref = testing::G_from_definition(d);
    EXPECT_LE((cache.G() - ref).cwiseAbs().maxCoeff(), 1e-12 * (1 + ref.cwiseAbs().maxCoeff()));
    for (Index i = 0; i < d.m(); ++i) {
      EXPECT_EQ(cache.r().row(i).head(half_size(n)), cache.s().row(i));
      EXPECT_EQ(cache.r().row(i).tail(n), d.X().row(i));
      EXPECT_EQ(cache.M(i), sample_design_M(d.x(i)));
    }
  }
}

TEST(AssembleDesign, QuadraticFormIsSumOfSquaredGradients) {
  std::mt19937_64 eng(7);
  for (int t = 0; t < 100; ++t) {
    const Dataset d = testing::random_dataset(eng, 10, 3);
    const DesignCache cache = assemble_design(d);
    const SymmetricMatrix W = random_symmetric(eng, 3);
    const Vector b = testing::random_vector(eng, 3);
    Vector z(z_size(3));
    z << hvec(W).values(), b;
    const double form = 0.5 * z.dot(cache.G() * z);
    double direct = 0.0;
    for (Index i = 0; i < d.m(); ++i) direct += (W.dense() * d.x(i) + b).squaredNorm();
    EXPECT_LE(std::abs(form - direct), 1e-10 * (1 + form));
  }
}

TEST(AssembleDesign, GIsPositiveSemidefinite) {
  std::mt19937_64 eng(8);
  for (int t = 0; t < 30; ++t) {
    const Dataset d = testing::random_dataset(eng, 3 + t % 5, 1 + t % 4);
    const DesignCache cache = assemble_design(d);
    Eigen::SelfAdjointEigenSolver<Matrix> es(cache.G());
    EXPECT_GE(es.eigenvalues().minCoeff(), -1e-8 * es.eigenvalues().cwiseAbs().maxCoeff());
  }
}

QuadSurfaceModel surface(SymmetricMatrix W, Vector b, double c) {
  QuadSurfaceModel m;
  m.W = std::move(W);
  m.b = std::move(b);
  m.c = c;
  return m;
}

TEST(QuadEval, Basics) {
  const QuadSurfaceModel lin = surface(SymmetricMatrix(2), Eigen::Vector2d(2, -1), 0.5);
  EXPECT_DOUBLE_EQ(quad_eval(lin, Eigen::Vector2d(1, 1)), 1.5);
  const QuadSurfaceModel circle = surface(SymmetricMatrix::from_dense(Matrix::Identity(2, 2)), Vector::Zero(2), -0.5);
  EXPECT_DOUBLE_EQ(quad_eval(circle, Eigen::Vector2d(1, 0)), 0.0);
  EXPECT_THROW(quad_eval(circle, Vector::Zero(3)), DimensionMismatch);
}

TEST(QuadEval, AgreesWithFeatureVector) {
  std::mt19937_64 eng(9);
  for (int t = 0; t < 50; ++t) {
    QuadSurfaceModel m = surface(random_symmetric(eng, 6), testing::random_vector(eng, 6), 0.3);
    const Vector x = testing::random_vector(eng, 6);
    const double f = quad_eval(m, x);
    EXPECT_NEAR(f, model_z(m).dot(feature_r(x)) + m.c, 1e-12 * (1 + std::abs(f)));
  }
}

TEST(Dataset, Validation) {
  EXPECT_THROW(Dataset(Matrix::Zero(2, 1), Eigen::Vector2d(1, 1)), NotTwoClasses);
  EXPECT_THROW(Dataset(Matrix::Zero(2, 1), Eigen::Vector2d(1, 0)), InvalidArgument);
  EXPECT_THROW(Dataset(Matrix::Zero(3, 1), Eigen::Vector2d(1, -1)), DimensionMismatch);
  const Dataset d(Matrix::Zero(2, 1), Eigen::Vector2d(1, -1));
  EXPECT_EQ(d.num_positive(), 1);
  EXPECT_EQ(d.num_negative(), 1);
}

}  // namespace
}  // namespace qssvm
