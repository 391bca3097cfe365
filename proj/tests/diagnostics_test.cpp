#include <gtest/gtest.h>

#include <random>

#include "qssvm/datagen.hpp"
#include "qssvm/diagnostics.hpp"
#include "test_support.hpp"

namespace qssvm {
namespace {

TEST(Assumptions, DetectsRankDeficiency) {
  Matrix X(4, 2);
  X << 1, 2, 2, 4, -1, -2, 3, 6;
  const AssumptionCheck a = check_assumptions(Dataset(X, Eigen::Vector4d(1, -1, 1, -1)));
  EXPECT_FALSE(a.full_column_rank);
}

TEST(Assumptions, DetectsOnesInColumnSpace) {
  Matrix X(4, 2);
  X << 1, 0, 1, 1, 1, 2, 1, 3;
  const AssumptionCheck a = check_assumptions(Dataset(X, Eigen::Vector4d(1, -1, 1, -1)));
  EXPECT_TRUE(a.full_column_rank);
  EXPECT_FALSE(a.ones_outside_columns);
}

TEST(Assumptions, GenericDataPasses) {
  std::mt19937_64 eng(1);
  const AssumptionCheck a = check_assumptions(testing::random_dataset(eng, 30, 4));
  EXPECT_TRUE(a.full_column_rank);
  EXPECT_TRUE(a.ones_outside_columns);
}

TEST(GramPd, SchurTestAgreesWithEigenvalues) {
  std::mt19937_64 eng(2);
  for (int t = 0; t < 20; ++t) {
    const Index n = 1 + t % 4;
    const Index m = 1 + t;  // small m leaves G singular
    Matrix X = testing::random_matrix(eng, m, n);
    Vector y = Vector::Ones(m);
    y[0] = -1.0;
    if (m == 1) {
      X.conservativeResize(2, n);
      X.row(1) = -X.row(0);
      y = Eigen::Vector2d(-1, 1);
    }
    const DesignCache cache = assemble_design(Dataset(X, y));
    EXPECT_EQ(is_G_pd(cache), is_G_pd_schur(cache)) << "m=" << m << " n=" << n;
  }
}

TEST(GramPd, SingularWithTooFewSamples) {
  std::mt19937_64 eng(3);
  // hvec(W) has 6 entries for n = 3; two samples cannot pin them all down.
  const Dataset d = testing::random_dataset(eng, 2, 3);
  EXPECT_FALSE(is_G_pd(assemble_design(d)));
  const Dataset big = testing::random_dataset(eng, 40, 3);
  EXPECT_TRUE(is_G_pd(assemble_design(big)));
}

TEST(Separability, LinearData) {
  const Dataset d = gen_linear_separable(3, 20, 20, 5);
  const SeparabilityCertificate c = check_separability(d, SeparabilityKind::Linear);
  ASSERT_EQ(c.kind, SeparabilityKind::Linear);
  ASSERT_TRUE(c.witness.has_value());
  EXPECT_GE(c.min_margin, 1.0 - 1e-6);
  for (Index i = 0; i < d.m(); ++i) EXPECT_EQ(predict(*c.witness, d.x(i)), static_cast<int>(d.label(i)));
}

TEST(Separability, RingIsQuadraticOnly) {
  const Dataset d = gen_ring(20, 20, 6);
  EXPECT_EQ(check_separability(d, SeparabilityKind::Linear).kind, SeparabilityKind::None);
  EXPECT_EQ(check_separability(d, SeparabilityKind::Quadratic).kind, SeparabilityKind::Quadratic);
}

TEST(Separability, AlternatingLineIsNotQuadratic) {
  Matrix X(4, 1);
  X << -1.5, -0.5, 0.5, 1.5;
  const Dataset d(X, Eigen::Vector4d(1, -1, 1, -1));
  EXPECT_EQ(check_separability(d, SeparabilityKind::Quadratic).kind, SeparabilityKind::None);
  EXPECT_THROW(check_separability(d, SeparabilityKind::None), InvalidArgument);
}

TEST(VerifyKkt, MatchesTrainingReport) {
  std::mt19937_64 eng(7);
  const Dataset d = testing::random_dataset(eng, 25, 2);
  TrainConfig cfg;
  cfg.variant = Variant::L1SQSSVM;
  cfg.lambda = 0.3;
  cfg.mu = 2.0;
  const TrainReport r = train(d, cfg);
  const KktReport k = verify_kkt(d, r);
  EXPECT_NEAR(k.worst(), r.kkt.worst(), 1e-12);
  EXPECT_LE(k.worst(), 1e-6);
}

TEST(VerifyKkt, RestrictedUsesLayoutZeroSet) {
  const Dataset d = gen_ring(15, 15, 8);
  TrainConfig cfg;
  cfg.variant = Variant::RQSSVM;
  cfg.lambda = 0.1;
  cfg.zero_set = std::vector<Index>{1};
  const TrainReport r = train(d, cfg);
  EXPECT_EQ(layout_zero_set(r.layout), (std::vector<Index>{1}));
  EXPECT_LE(verify_kkt(d, r).worst(), 1e-6);
}

TEST(SvmEquivalence, AboveBoundMatchesSvm) {
  const Dataset d = gen_linear_separable(2, 15, 15, 9);
  const SvmComparison c = compare_with_svm(d, lambda_equivalence_bound(d));
  EXPECT_LE(c.w_infnorm, 1e-6);
  EXPECT_LE(c.b_gap, 1e-4);
  EXPECT_LE(c.c_gap, 1e-4);
}

TEST(SvmEquivalence, ResidualThresholdIsSharp) {
  const Dataset d = gen_linear_separable(2, 15, 15, 10);
  TrainConfig cfg;
  cfg.variant = Variant::SVM;
  const double res = svm_equivalence_residual(d, train(d, cfg));
  ASSERT_GT(res, 0.0);
  EXPECT_LE(compare_with_svm(d, 2.0 * res * 1.01).w_infnorm, 1e-6);
  EXPECT_GT(compare_with_svm(d, 2.0 * res * 0.5).w_infnorm, 1e-6);
  EXPECT_LE(2.0 * res, lambda_equivalence_bound(d) * (1.0 + 1e-9));
}

TEST(SvmEquivalence, RejectsNonSeparable) {
  EXPECT_THROW(compare_with_svm(gen_ring(10, 10, 2), 1.0), NotLinearlySeparable);
}

TEST(Curvature, Properties) {
  QuadSurfaceModel m;
  m.W = SymmetricMatrix(2);
  m.b = Eigen::Vector2d(1, -2);
  m.c = 0.5;
  EXPECT_EQ(curvature(m), 0.0);
  m.W.set(0, 1, 3.0);
  const double k = curvature(m);
  EXPECT_GT(k, 0.0);
  EXPECT_LT(k, 1.0);
  QuadSurfaceModel scaled = m;
  scaled.W = SymmetricMatrix::from_dense(4.0 * m.W.dense());
  scaled.b = 4.0 * m.b;
  scaled.c = 4.0 * m.c;
  EXPECT_NEAR(curvature(scaled), k, 1e-14);
}

TEST(InterceptInterval, TwoPointsPinTheIntercept) {
  Matrix X(2, 1);
  X << -1, 1;
  const Dataset d(X, Eigen::Vector2d(-1, 1));
  QuadSurfaceModel m;
  m.W = SymmetricMatrix(1);
  m.b = Vector::Ones(1);
  const Interval iv = intercept_interval(d, m, Vector::Zero(2));
  EXPECT_DOUBLE_EQ(iv.lo, 0.0);
  EXPECT_DOUBLE_EQ(iv.hi, 0.0);
}

TEST(InterceptInterval, ContainsTrainedIntercept) {
  std::mt19937_64 eng(11);
  for (int t = 0; t < 5; ++t) {
    const Dataset d = testing::random_dataset(eng, 20, 2);
    TrainConfig cfg;
    cfg.variant = Variant::SQSSVM;
    cfg.mu = 1.0;
    const TrainReport r = train(d, cfg);
    const Interval iv = intercept_interval(d, r.model, r.xi);
    EXPECT_LE(iv.lo, r.model.c + 1e-7);
    EXPECT_GE(iv.hi, r.model.c - 1e-7);
  }
}

}  // namespace
}  // namespace qssvm
