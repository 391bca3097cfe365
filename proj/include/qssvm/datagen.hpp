#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "qssvm/dataset.hpp"
#include "qssvm/halfvec.hpp"
#include "qssvm/rng.hpp"

namespace qssvm {

/// Generating surface f(x) = 1/2 x'Wx + b'x + c.
struct SurfaceSpec {
  SymmetricMatrix W;
  Vector b;
  double c = 0.0;

  Index n() const { return b.size(); }
  double operator()(const Vector& x) const { return 0.5 * x.dot(W.dense() * x) + b.dot(x) + c; }
  void validate() const {
    if (W.dim() != b.size()) throw DimensionMismatch("SurfaceSpec: W and b disagree on n");
    if (b.size() == 0) throw InvalidArgument("SurfaceSpec: n must be >= 1");
  }
};

struct GenConfig {
  std::uint64_t seed = 0;
  Index m_pos = 0, m_neg = 0;
  double margin = 0.5;      ///< clean points satisfy y f(x) >= margin
  double box = 5.0;         ///< samples are uniform in [-box, box]^n
  Index noise_count = 0;    ///< extra points with |f(x)| <= noise_band and coin-flip labels
  double noise_band = 0.25;
  std::uint64_t max_draws = 10'000'000;

  void validate() const {
    if (m_pos < 1 || m_neg < 1) throw InvalidArgument("GenConfig: both class counts must be >= 1");
    if (!(margin > 0.0)) throw InvalidArgument("GenConfig: margin must be positive");
    if (!(box > 0.0)) throw InvalidArgument("GenConfig: box must be positive");
    if (noise_count < 0) throw InvalidArgument("GenConfig: negative noise count");
    if (!(noise_band > 0.0)) throw InvalidArgument("GenConfig: noise band must be positive");
  }
};

/// The 10-feature surface with W[i][i+2] = i + 1 (i = 0..6), b = (1, ..., 1, -1), c = 2.
inline SurfaceSpec builtin_sparse_surface() {
  SurfaceSpec s;
  s.W = SymmetricMatrix(10);
  for (Index i = 0; i < 7; ++i) s.W.set(i, i + 2, static_cast<double>(i + 1));
  s.b = Vector::Ones(10);
  s.b[9] = -1.0;
  s.c = 2.0;
  return s;
}

namespace detail {

inline Vector draw_box(Rng& rng, Index n, double box) {
  Vector x(n);
  for (Index k = 0; k < n; ++k) x[k] = rng.uniform(-box, box);
  return x;
}

inline Dataset assemble(const std::vector<Vector>& xs, const std::vector<double>& ys, Index n) {
  Matrix X(static_cast<Index>(xs.size()), n);
  Vector y(static_cast<Index>(ys.size()));
  for (std::size_t i = 0; i < xs.size(); ++i) {
    X.row(static_cast<Index>(i)) = xs[i].transpose();
    y[static_cast<Index>(i)] = ys[i];
  }
  return Dataset(std::move(X), std::move(y));
}

class DrawBudget {
 public:
  explicit DrawBudget(std::uint64_t limit) : left_(limit) {}
  void spend() {
    if (left_ == 0)
      throw RejectionBudgetExceeded("sampling budget exhausted; the surface rarely meets the box");
    --left_;
  }

 private:
  std::uint64_t left_;
};

/// Noise points in the band around the surface, labels taken from `labels` in order.
inline void add_band_points(const SurfaceSpec& spec, const GenConfig& cfg, Rng& rng, DrawBudget& budget,
                            const std::vector<double>& labels, std::vector<Vector>& xs,
                            std::vector<double>& ys) {
  for (double label : labels) {
    for (;;) {
      budget.spend();
      Vector x = draw_box(rng, spec.n(), cfg.box);
      if (std::abs(spec(x)) <= cfg.noise_band) {
        xs.push_back(std::move(x));
        ys.push_back(label);
        break;
      }
    }
  }
}

inline void add_clean_points(const SurfaceSpec& spec, const GenConfig& cfg, Rng& rng, DrawBudget& budget,
                             std::vector<Vector>& xs, std::vector<double>& ys) {
  Index pos = 0, neg = 0;
  while (pos < cfg.m_pos || neg < cfg.m_neg) {
    budget.spend();
    Vector x = draw_box(rng, spec.n(), cfg.box);
    const double f = spec(x);
    if (f >= cfg.margin && pos < cfg.m_pos) {
      xs.push_back(std::move(x));
      ys.push_back(1.0);
      ++pos;
    } else if (f <= -cfg.margin && neg < cfg.m_neg) {
      xs.push_back(std::move(x));
      ys.push_back(-1.0);
      ++neg;
    }
  }
}

}  // namespace detail

/// Rejection sampling around a surface: m_pos points with f >= margin, m_neg with
/// f <= -margin, then noise_count points with |f| <= noise_band and random labels.
inline Dataset gen_from_surface(const SurfaceSpec& spec, const GenConfig& cfg) {
  spec.validate();
  cfg.validate();
  Rng rng(cfg.seed);
  detail::DrawBudget budget(cfg.max_draws);
  std::vector<Vector> xs;
  std::vector<double> ys;
  detail::add_clean_points(spec, cfg, rng, budget, xs, ys);
  std::vector<double> noise_labels;
  for (Index k = 0; k < cfg.noise_count; ++k) noise_labels.push_back(rng.coin() ? 1.0 : -1.0);
  detail::add_band_points(spec, cfg, rng, budget, noise_labels, xs, ys);
  return detail::assemble(xs, ys, spec.n());
}

/// Hyperplane with a random unit normal through the origin.
inline SurfaceSpec random_hyperplane(Index n, std::uint64_t seed) {
  Rng rng(seed);
  SurfaceSpec s;
  s.W = SymmetricMatrix(n);
  s.b.resize(n);
  for (Index k = 0; k < n; ++k) s.b[k] = rng.normal();
  s.b.normalize();
  s.c = 0.0;
  return s;
}

inline Dataset gen_linear_separable(Index n, Index m_pos, Index m_neg, std::uint64_t seed) {
  if (n < 1) throw InvalidArgument("gen_linear_separable: n must be >= 1");
  GenConfig cfg;
  cfg.seed = derive_seed(seed, 1);
  cfg.m_pos = m_pos;
  cfg.m_neg = m_neg;
  return gen_from_surface(random_hyperplane(n, seed), cfg);
}

/// Random quadratic surface with N(0,1) entries whose constant term puts the zero level
/// set through the middle of the sampling box (c = -median of the quadratic part).
inline SurfaceSpec random_quadratic_surface(Index n, std::uint64_t seed, double box = 5.0) {
  Rng rng(seed);
  SurfaceSpec s;
  s.W = SymmetricMatrix(n);
  for (Index j = 0; j < n; ++j)
    for (Index i = j; i < n; ++i) s.W.set(i, j, rng.normal());
  s.b.resize(n);
  for (Index k = 0; k < n; ++k) s.b[k] = rng.normal();
  std::vector<double> vals(1001);
  for (double& v : vals) v = s(detail::draw_box(rng, n, box));
  std::nth_element(vals.begin(), vals.begin() + 500, vals.end());
  s.c = -vals[500];
  return s;
}

/// Two-dimensional ring data: label -1 inside radius r_inner, +1 on the annulus
/// [r_outer, r_outer + 1].
inline Dataset gen_ring(Index m_inner, Index m_outer, std::uint64_t seed, double r_inner = 1.0,
                        double r_outer = 3.0) {
  if (m_inner < 1 || m_outer < 1) throw InvalidArgument("gen_ring: counts must be >= 1");
  if (!(r_inner > 0.0 && r_outer > r_inner)) throw InvalidArgument("gen_ring: need 0 < r_inner < r_outer");
  Rng rng(seed);
  std::vector<Vector> xs;
  std::vector<double> ys;
  auto push = [&](double r0, double r1, double label) {
    const double t = 2.0 * std::numbers::pi * rng.uniform01();
    // Area-uniform radius on [r0, r1].
    const double r = std::sqrt(rng.uniform(r0 * r0, r1 * r1));
    xs.push_back(Eigen::Vector2d(r * std::cos(t), r * std::sin(t)));
    ys.push_back(label);
  };
  for (Index i = 0; i < m_inner; ++i) push(0.0, r_inner, -1.0);
  for (Index i = 0; i < m_outer; ++i) push(r_outer, r_outer + 1.0, 1.0);
  return detail::assemble(xs, ys, 2);
}

enum class ArtificialSet { I, II, III, IV, ThreeD };

struct ArtificialShape {
  Index n, n_pos, n_neg;
  bool noisy;
};

inline ArtificialShape artificial_shape(ArtificialSet which) {
  switch (which) {
    case ArtificialSet::I: return {3, 67, 58, true};
    case ArtificialSet::II: return {3, 79, 71, true};
    case ArtificialSet::III: return {5, 106, 81, true};
    case ArtificialSet::IV: return {10, 204, 171, true};
    case ArtificialSet::ThreeD: return {3, 99, 101, false};
  }
  throw InvalidArgument("unknown artificial set");
}

/// Artificial sets with fixed dimensions and class sizes. I-IV come from random quadratic surfaces
/// with 10% of the points drawn in the noise band; the class counts stay exact because
/// the noise labels are a fixed multiset in random order. ThreeD is clean.
inline Dataset gen_artificial(ArtificialSet which, std::uint64_t seed) {
  const ArtificialShape shape = artificial_shape(which);
  const SurfaceSpec spec = random_quadratic_surface(shape.n, derive_seed(seed, 2));
  const Index m = shape.n_pos + shape.n_neg;
  const Index noise = shape.noisy ? static_cast<Index>(std::llround(0.1 * static_cast<double>(m))) : 0;
  const Index noise_pos = static_cast<Index>(
      std::llround(static_cast<double>(noise) * static_cast<double>(shape.n_pos) / static_cast<double>(m)));
  GenConfig cfg;
  cfg.seed = derive_seed(seed, 3);
  cfg.m_pos = shape.n_pos - noise_pos;
  cfg.m_neg = shape.n_neg - (noise - noise_pos);
  cfg.validate();
  Rng rng(cfg.seed);
  detail::DrawBudget budget(cfg.max_draws);
  std::vector<Vector> xs;
  std::vector<double> ys;
  detail::add_clean_points(spec, cfg, rng, budget, xs, ys);
  std::vector<double> labels(static_cast<std::size_t>(noise), -1.0);
  std::fill_n(labels.begin(), noise_pos, 1.0);
  for (std::size_t i = labels.size(); i > 1; --i)
    std::swap(labels[i - 1], labels[static_cast<std::size_t>(rng.below(i))]);
  detail::add_band_points(spec, cfg, rng, budget, labels, xs, ys);
  return detail::assemble(xs, ys, shape.n);
}

inline std::string to_string(ArtificialSet s) {
  switch (s) {
    case ArtificialSet::I: return "I";
    case ArtificialSet::II: return "II";
    case ArtificialSet::III: return "III";
    case ArtificialSet::IV: return "IV";
    case ArtificialSet::ThreeD: return "3D";
  }
  return "?";
}

}  // namespace qssvm
