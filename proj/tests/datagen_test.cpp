#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <vector>

#include "qssvm/datagen.hpp"
#include "qssvm/diagnostics.hpp"

namespace qssvm {
namespace {

TEST(Rng, EngineMatchesStandardReference) {
  // The standard fixes the 10000th output of a default-seeded mt19937_64.
  Rng rng(5489u);
  for (int i = 0; i < 9999; ++i) rng.next_u64();
  EXPECT_EQ(rng.next_u64(), 9981545732273789042ULL);
}

TEST(Rng, DeterministicPerSeed) {
  Rng a(42), b(42), c(43);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const double x = a.normal();
    EXPECT_EQ(x, b.normal());
    differs |= x != c.normal();
  }
  EXPECT_TRUE(differs);
}

TEST(Rng, MomentsAndRanges) {
  Rng rng(7);
  const int N = 200000;
  double su = 0, sn = 0, sn2 = 0;
  std::array<int, 5> bins{};
  for (int i = 0; i < N; ++i) {
    const double u = rng.uniform01();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    su += u;
    const double z = rng.normal();
    sn += z;
    sn2 += z * z;
    ++bins[static_cast<std::size_t>(rng.below(5))];
  }
  EXPECT_NEAR(su / N, 0.5, 0.005);
  EXPECT_NEAR(sn / N, 0.0, 0.01);
  EXPECT_NEAR(sn2 / N, 1.0, 0.02);
  for (int b : bins) EXPECT_NEAR(b / static_cast<double>(N), 0.2, 0.01);
  EXPECT_THROW(rng.below(0), InvalidArgument);
}

TEST(Rng, DerivedSeedsAreDistinct) {
  EXPECT_NE(derive_seed(0, 1), derive_seed(0, 2));
  EXPECT_NE(derive_seed(0, 1), derive_seed(1, 1));
  EXPECT_NE(derive_seed(0, 1, 0), derive_seed(0, 1, 1));
  static_assert(derive_seed(3, 4, 5) == derive_seed(3, 4, 5));
}

TEST(Dataset, RejectsBadInput) {
  Matrix X(2, 1);
  X << 0, 1;
  EXPECT_THROW(Dataset(X, Eigen::Vector3d(1, -1, 1)), DimensionMismatch);
  EXPECT_THROW(Dataset(X, Eigen::Vector2d(1, 1)), NotTwoClasses);
  EXPECT_THROW(Dataset(X, Eigen::Vector2d(1, 0)), InvalidArgument);
  EXPECT_THROW(Dataset(Matrix(0, 1), Vector(0)), EmptyDataset);
  X(0, 0) = std::nan("");
  EXPECT_THROW(Dataset(X, Eigen::Vector2d(1, -1)), InvalidArgument);
}

TEST(Dataset, Subset) {
  Matrix X(3, 1);
  X << 0, 1, 2;
  const Dataset d(X, Eigen::Vector3d(1, -1, 1));
  const std::array<Index, 2> rows{2, 1};
  const Dataset s = d.subset(rows);
  EXPECT_EQ(s.m(), 2);
  EXPECT_EQ(s.X()(0, 0), 2.0);
  const std::array<Index, 2> same{0, 2};
  EXPECT_THROW(d.subset(same), NotTwoClasses);
}

TEST(GenFromSurface, CountsMarginsAndDeterminism) {
  const SurfaceSpec spec = builtin_sparse_surface();
  GenConfig cfg;
  cfg.seed = 3;
  cfg.m_pos = 40;
  cfg.m_neg = 30;
  cfg.noise_count = 10;
  const Dataset d = gen_from_surface(spec, cfg);
  ASSERT_EQ(d.m(), 80);
  ASSERT_EQ(d.n(), 10);
  for (Index i = 0; i < 70; ++i) {
    EXPECT_GE(d.label(i) * spec(d.x(i)), cfg.margin);
    EXPECT_LE(d.X().row(i).cwiseAbs().maxCoeff(), cfg.box);
  }
  for (Index i = 70; i < 80; ++i) EXPECT_LE(std::abs(spec(d.x(i))), cfg.noise_band);
  Index pos = 0;
  for (Index i = 0; i < 70; ++i) pos += d.label(i) > 0;
  EXPECT_EQ(pos, 40);
  const Dataset again = gen_from_surface(spec, cfg);
  EXPECT_EQ(d.X(), again.X());
  EXPECT_EQ(d.y(), again.y());
}

TEST(GenFromSurface, BudgetAndValidation) {
  SurfaceSpec far;
  far.W = SymmetricMatrix(1);
  far.b = Vector::Ones(1);
  far.c = 100.0;  // f > 0 everywhere in the box
  GenConfig cfg;
  cfg.m_pos = 1;
  cfg.m_neg = 1;
  cfg.max_draws = 1000;
  EXPECT_THROW(gen_from_surface(far, cfg), RejectionBudgetExceeded);
  cfg.margin = 0.0;
  EXPECT_THROW(gen_from_surface(far, cfg), InvalidArgument);
  SurfaceSpec bad;
  bad.W = SymmetricMatrix(2);
  bad.b = Vector::Ones(1);
  EXPECT_THROW(bad.validate(), DimensionMismatch);
}

TEST(BuiltinSurface, Structure) {
  const SurfaceSpec s = builtin_sparse_surface();
  EXPECT_EQ((hvec(s.W).values().array() != 0.0).count(), 7);
  EXPECT_EQ(s.W(0, 2), 1.0);
  EXPECT_EQ(s.W(8, 6), 7.0);
  EXPECT_EQ(s.b[9], -1.0);
  EXPECT_EQ(s.c, 2.0);
}

TEST(LinearSeparable, IsSeparable) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const Dataset d = gen_linear_separable(4, 20, 25, seed);
    EXPECT_EQ(d.num_positive(), 20);
    EXPECT_EQ(check_separability(d, SeparabilityKind::Linear).kind, SeparabilityKind::Linear);
  }
}

TEST(Ring, RadiiAndLabels) {
  const Dataset d = gen_ring(30, 40, 5);
  EXPECT_EQ(d.m(), 70);
  for (Index i = 0; i < d.m(); ++i) {
    const double r = d.X().row(i).norm();
    if (d.label(i) < 0)
      EXPECT_LE(r, 1.0);
    else {
      EXPECT_GE(r, 3.0);
      EXPECT_LE(r, 4.0);
    }
  }
  EXPECT_THROW(gen_ring(0, 3, 1), InvalidArgument);
  EXPECT_THROW(gen_ring(3, 3, 1, 2.0, 1.0), InvalidArgument);
}

TEST(RandomQuadratic, ZeroLevelSetCutsTheBox) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const SurfaceSpec s = random_quadratic_surface(3, seed);
    Rng rng(seed + 100);
    int pos = 0;
    const int N = 2000;
    for (int k = 0; k < N; ++k) pos += s(detail::draw_box(rng, 3, 5.0)) > 0;
    EXPECT_GT(pos, N / 4);
    EXPECT_LT(pos, 3 * N / 4);
  }
}

TEST(ArtificialSets, ExactShapes) {
  for (ArtificialSet which : {ArtificialSet::I, ArtificialSet::II, ArtificialSet::III, ArtificialSet::IV, ArtificialSet::ThreeD}) {
    const ArtificialShape shape = artificial_shape(which);
    const Dataset d = gen_artificial(which, 11);
    EXPECT_EQ(d.n(), shape.n) << to_string(which);
    EXPECT_EQ(d.num_positive(), shape.n_pos) << to_string(which);
    EXPECT_EQ(d.num_negative(), shape.n_neg) << to_string(which);
  }
}

TEST(ArtificialSets, CleanSetIsQuadraticallySeparable) {
  const Dataset d = gen_artificial(ArtificialSet::ThreeD, 2);
  EXPECT_EQ(check_separability(d, SeparabilityKind::Quadratic).kind, SeparabilityKind::Quadratic);
}

}  // namespace
}  // namespace qssvm
