#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "qssvm/datagen.hpp"
#include "qssvm/diagnostics.hpp"
#include "qssvm/models.hpp"
#include "test_support.hpp"

namespace qssvm {
namespace {

Dataset two_points() {
  Matrix X(2, 1);
  X << -1, 1;
  return Dataset(X, Eigen::Vector2d(-1, 1));
}

TrainConfig config(Variant v, double lambda = 0.0, std::optional<double> mu = std::nullopt) {
  TrainConfig c;
  c.variant = v;
  c.lambda = lambda;
  c.mu = mu;
  return c;
}

double rel_gap(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

Dataset sparse_surface_data(std::uint64_t seed) {
  SurfaceSpec s;
  s.W = SymmetricMatrix(3);
  s.W.set(0, 0, 2.0);
  s.W.set(2, 1, -1.0);
  s.b = Eigen::Vector3d(0.5, 0.0, -1.0);
  s.c = -1.0;
  GenConfig g;
  g.seed = seed;
  g.m_pos = 25;
  g.m_neg = 25;
  g.box = 2.0;
  g.margin = 0.3;
  return gen_from_surface(s, g);
}

TEST(TrainConfig, Validation) {
  EXPECT_THROW(config(Variant::SQSSVM).validate(2), InvalidConfig);
  EXPECT_THROW(config(Variant::QSSVM, 0.0, 1.0).validate(2), InvalidConfig);
  EXPECT_THROW(config(Variant::QSSVM, 1.0).validate(2), InvalidConfig);
  EXPECT_THROW(config(Variant::L1QSSVM, -1.0).validate(2), InvalidConfig);
  TrainConfig r = config(Variant::RQSSVM);
  EXPECT_THROW(r.validate(2), InvalidConfig);
  r.zero_set = std::vector<Index>{3};
  EXPECT_THROW(r.validate(2), InvalidConfig);
  r.zero_set = std::vector<Index>{2};
  EXPECT_NO_THROW(r.validate(2));
  TrainConfig q = config(Variant::QSSVM);
  q.zero_set = std::vector<Index>{0};
  EXPECT_THROW(q.validate(2), InvalidConfig);
}

TEST(BuildQp, HardSvmSmallestInstance) {
  const Dataset d = two_points();
  const QuadraticProgram qp = build_qp(d, config(Variant::SVM), assemble_design(d));
  EXPECT_EQ(qp.num_vars(), 2);
  EXPECT_EQ(qp.num_rows(), 2);
  EXPECT_TRUE(qp.nonneg.empty());
}

TEST(BuildQp, SplitVariableCount) {
  std::mt19937_64 eng(1);
  const Dataset d = testing::random_dataset(eng, 3, 2);
  const QuadraticProgram qp = build_qp(d, config(Variant::L1SQSSVM, 1.0, 1.0), assemble_design(d));
  // p and q for 3 hvec entries, b, c, and one slack per sample.
  EXPECT_EQ(qp.num_vars(), 2 * 3 + 2 + 1 + 3);
  EXPECT_EQ(qp.num_rows(), 3);
  EXPECT_EQ(qp.nonneg.size(), 2u * 3u + 3u);
}

TEST(Train, TwoPointHardSvm) {
  const TrainReport r = train(two_points(), config(Variant::SVM));
  EXPECT_NEAR(r.model.b[0], 1.0, 1e-9);
  EXPECT_NEAR(r.model.c, 0.0, 1e-9);
  EXPECT_NEAR(r.objective, 0.5, 1e-9);
  EXPECT_EQ(r.model.W.dense().cwiseAbs().maxCoeff(), 0.0);
  EXPECT_LE(r.kkt.worst(), 1e-9);
  // Multipliers of min 1/2 u^2: u = sum alpha_i y_i x_i and sum alpha_i y_i = 0.
  EXPECT_NEAR(r.kkt.alpha[0], 0.5, 1e-9);
  EXPECT_NEAR(r.kkt.alpha[1], 0.5, 1e-9);
}

TEST(Train, TwoPointLargeLambdaReducesToSvm) {
  const Dataset d = two_points();
  const TrainReport svm = train(d, config(Variant::SVM));
  const TrainReport q = train(d, config(Variant::L1QSSVM, 1e6));
  EXPECT_LE(hvec(q.model.W).values().cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_NEAR(q.model.b[0], svm.model.b[0], 1e-4);
  EXPECT_NEAR(q.model.c, svm.model.c, 1e-4);
  EXPECT_LE(q.kkt.worst(), 1e-6);
}

TEST(Train, HardMarginInfeasibleIsAnError) {
  const Dataset ring = gen_ring(20, 20, 3);
  EXPECT_THROW(train(ring, config(Variant::SVM)), HardMarginInfeasible);
  EXPECT_NO_THROW(train(ring, config(Variant::QSSVM)));
}

TEST(Train, RingVanishingSlack) {
  const Dataset ring = gen_ring(30, 30, 11);
  const double lambda = 0.5;
  const double bound = mu_vanishing_bound(ring, lambda);
  ASSERT_TRUE(std::isfinite(bound));
  const TrainReport r = train(ring, config(Variant::L1SQSSVM, lambda, 2.0 * bound));
  EXPECT_LE(r.xi.lpNorm<1>(), 1e-6);
  EXPECT_LE(r.kkt.worst(), 1e-6);
}

TEST(Train, SoftVariantsAlwaysSucceedAndSatisfyKkt) {
  std::mt19937_64 eng(5);
  for (int t = 0; t < 6; ++t) {
    const Dataset d = testing::random_dataset(eng, 15 + t, 1 + t % 3);
    for (Variant v : {Variant::SSVM, Variant::SQSSVM, Variant::L1SQSSVM}) {
      const TrainReport r = train(d, config(v, v == Variant::L1SQSSVM ? 0.3 : 0.0, 2.0));
      EXPECT_LE(r.kkt.worst(), 1e-6) << to_string(v);
      EXPECT_GE(r.xi.minCoeff(), -1e-8);
    }
  }
}

TEST(Train, SplitSolutionMatchesModel) {
  std::mt19937_64 eng(6);
  const Dataset d = testing::random_dataset(eng, 20, 3);
  const TrainReport r = train(d, config(Variant::L1SQSSVM, 0.1, 4.0));
  ASSERT_EQ(r.layout.w_mode, WMode::Split);
  const Vector w = hvec(r.model.W).values();
  for (Index a = 0; a < r.layout.nw(); ++a) {
    const Index j = r.layout.w_indices[static_cast<std::size_t>(a)];
    EXPECT_NEAR(w[j], r.split_solution[r.layout.p_offset + a] - r.split_solution[r.layout.q_offset + a], 1e-10);
  }
}

TEST(Train, LinearVariantsHaveExactlyZeroW) {
  std::mt19937_64 eng(7);
  const Dataset d = testing::random_dataset(eng, 20, 3);
  const TrainReport r = train(d, config(Variant::SSVM, 0.0, 1.0));
  EXPECT_EQ(r.model.W.dense().cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(r.model.W.dim(), 3);
}

TEST(Train, ZeroLambdaCollapsesToPlainVariant) {
  std::mt19937_64 eng(8);
  for (int t = 0; t < 4; ++t) {
    const Dataset soft = testing::random_dataset(eng, 25, 2 + t % 2);
    EXPECT_LE(rel_gap(train(soft, config(Variant::L1SQSSVM, 0.0, 3.0)).objective,
                      train(soft, config(Variant::SQSSVM, 0.0, 3.0)).objective),
              1e-6);
    const Dataset hard = gen_ring(15, 15, 20 + static_cast<std::uint64_t>(t));
    EXPECT_LE(rel_gap(train(hard, config(Variant::L1QSSVM)).objective, train(hard, config(Variant::QSSVM)).objective),
              1e-6);
  }
}

TEST(Train, L1NormNonincreasingInLambda) {
  std::mt19937_64 eng(9);
  const Dataset d = testing::random_dataset(eng, 30, 3);
  double prev = std::numeric_limits<double>::infinity();
  for (int e = -4; e <= 5; ++e) {
    const TrainReport r = train(d, config(Variant::L1SQSSVM, std::ldexp(1.0, e), 2.0));
    const double l1 = hvec(r.model.W).values().lpNorm<1>();
    EXPECT_LE(l1, prev + 1e-8) << "lambda 2^" << e;
    prev = l1;
  }
}

TEST(Train, UniqueZUnderPerturbedStart) {
  std::mt19937_64 eng(10);
  for (int t = 0; t < 4; ++t) {
    const Dataset d = testing::random_dataset(eng, 20, 2);
    ASSERT_TRUE(is_G_pd(assemble_design(d)));
    TrainConfig a = config(Variant::L1SQSSVM, 0.2, 5.0);
    TrainConfig b = a;
    b.solver.start_seed = 100 + static_cast<std::uint64_t>(t);
    const TrainReport ra = train(d, a), rb = train(d, b);
    EXPECT_LE((model_z(ra.model) - model_z(rb.model)).cwiseAbs().maxCoeff(), 1e-6);
  }
}

TEST(Train, RestrictedModelPinsZeroSet) {
  const Dataset d = sparse_surface_data(3);
  TrainConfig cfg = config(Variant::RQSSVM, 0.5);
  cfg.zero_set = std::vector<Index>{1, 2, 3, 5};
  const TrainReport r = train(d, cfg);
  const Vector w = hvec(r.model.W).values();
  for (Index j : *cfg.zero_set) EXPECT_EQ(w[j], 0.0);
  EXPECT_LE(r.kkt.worst(), 1e-6);
}

TEST(Train, PinningTheOptimalZeroSetKeepsTheOptimum) {
  // Labels depend on x1 only, so the optimal W has zero x2 terms.
  Matrix X(8, 2);
  X << -2, 0.3, -2, -0.7, 2, 0.5, 2, -0.2, -0.5, 0.6, -0.5, -0.4, 0.5, 0.8, 0.5, -0.9;
  Vector y(8);
  y << 1, 1, 1, 1, -1, -1, -1, -1;
  const Dataset d(X, y);
  const double lambda = 0.5;
  const TrainReport full = train(d, config(Variant::L1QSSVM, lambda));
  const std::vector<Index> zeros = sparsity_pattern(full.model, 1e-7);
  ASSERT_EQ(zeros, (std::vector<Index>{1, 2}));
  TrainConfig cfg = config(Variant::RQSSVM, lambda);
  cfg.zero_set = zeros;
  const TrainReport r = train(d, cfg);
  EXPECT_LE(rel_gap(r.objective, full.objective), 1e-6);
  EXPECT_LE((model_z(r.model) - model_z(full.model)).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_LE(r.kkt.worst(), 1e-6);
}

TEST(Predict, Examples) {
  QuadSurfaceModel lin;
  lin.W = SymmetricMatrix(1);
  lin.b = Vector::Ones(1);
  EXPECT_EQ(predict(lin, Vector::Constant(1, 2.0)), 1);
  EXPECT_EQ(predict(lin, Vector::Zero(1)), 1);  // tie maps to +1
  QuadSurfaceModel circle;
  circle.W = SymmetricMatrix::from_dense(Matrix::Identity(2, 2));
  circle.b = Vector::Zero(2);
  circle.c = -0.5;
  EXPECT_EQ(predict(circle, Vector::Zero(2)), -1);
  EXPECT_EQ(predict(circle, Eigen::Vector2d(1, 0)), 1);  // exactly on the surface
}

TEST(LambdaBound, TwoPointClosedForm) {
  // Witness (2, 0): c2 = 1, ||X||_2 = sqrt(2), max row norms 1.
  EXPECT_NEAR(lambda_equivalence_bound(two_points()), 2.0 * 4.0 / 2.0 * (std::sqrt(2.0) + 1.0), 1e-8);
}

TEST(LambdaBound, ScaleInvariant) {
  const Dataset d = gen_linear_separable(3, 20, 20, 4);
  const double base = lambda_equivalence_bound(d);
  const Dataset scaled(3.0 * d.X(), d.y());
  EXPECT_NEAR(lambda_equivalence_bound(scaled) / base, 1.0, 1e-6);
  EXPECT_GT(base, 0.0);
  EXPECT_TRUE(std::isfinite(base));
}

TEST(LambdaBound, RejectsNonSeparable) {
  EXPECT_THROW(lambda_equivalence_bound(gen_ring(10, 10, 1)), NotLinearlySeparable);
}

TEST(MuBound, FiniteOnLinearDataAndRejectsNonQuadratic) {
  const double mu = mu_vanishing_bound(gen_linear_separable(2, 15, 15, 2), 1.0);
  EXPECT_GE(mu, 0.0);
  EXPECT_TRUE(std::isfinite(mu));
  Matrix X(4, 1);
  X << -1.5, -0.5, 0.5, 1.5;
  EXPECT_THROW(mu_vanishing_bound(Dataset(X, Eigen::Vector4d(1, -1, 1, -1)), 1.0), NotQuadraticallySeparable);
}

TEST(SparsityPattern, Examples) {
  QuadSurfaceModel m;
  m.W = SymmetricMatrix(2);
  m.b = Vector::Zero(2);
  EXPECT_EQ(sparsity_pattern(m, 1e-6), (std::vector<Index>{0, 1, 2}));
  m.W.set(0, 0, 1.0);
  EXPECT_EQ(sparsity_pattern(m, 1e-6), (std::vector<Index>{hvec_index(2, 1, 0), hvec_index(2, 1, 1)}));
  EXPECT_THROW(sparsity_pattern(m, 0.0), InvalidArgument);
}

TEST(Objective, KktDetectsPerturbedModel) {
  std::mt19937_64 eng(12);
  const Dataset d = testing::random_dataset(eng, 20, 2);
  const DesignCache cache = assemble_design(d);
  const TrainReport r = train(d, config(Variant::SQSSVM, 0.0, 2.0), cache);
  QuadSurfaceModel bad = r.model;
  bad.W.set(0, 0, bad.W(0, 0) + 1e-2);
  const KktReport k = evaluate_kkt(d, cache, bad, r.xi, r.kkt.alpha);
  EXPECT_GE(k.stationarity, 1e-3);
}

}  // namespace
}  // namespace qssvm
