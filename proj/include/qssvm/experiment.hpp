#pragma once

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "qssvm/dataset.hpp"
#include "qssvm/halfvec.hpp"
#include "qssvm/models.hpp"
#include "qssvm/rng.hpp"

namespace qssvm {

inline std::vector<Variant> default_benchmark_variants() {
  return {Variant::L1SQSSVM, Variant::SQSSVM, Variant::SSVM, Variant::SVM};
}

inline std::vector<double> pow2_grid(int lo, int hi) {
  std::vector<double> g;
  for (int e = lo; e <= hi; ++e) g.push_back(std::ldexp(1.0, e));
  return g;
}

struct ExperimentPlan {
  std::vector<Variant> variants = default_benchmark_variants();
  std::vector<double> training_rates{10.0, 20.0, 40.0};  ///< percent of the samples used for training
  int repetitions = 50;
  std::vector<double> mu_grid = pow2_grid(-3, 20);
  std::vector<double> lambda_grid = pow2_grid(-10, 25);
  std::uint64_t seed = 0;
  /// Score on the samples left out of training (and tune on the training subset)
  /// instead of scoring on the full data set.
  bool held_out = false;
  unsigned threads = 1;
  SolveOptions solver;

  void validate() const {
    if (variants.empty()) throw InvalidConfig("plan: no variants");
    for (Variant v : variants)
      if (v == Variant::RQSSVM) throw InvalidConfig("plan: R-QSSVM needs a zero set and is not benchmarked");
    if (training_rates.empty()) throw InvalidConfig("plan: no training rates");
    for (double r : training_rates) {
      if (!(r > 0.0 && r <= 100.0)) throw InvalidConfig("plan: training rates must lie in (0, 100]");
      if (held_out && r >= 100.0) throw InvalidConfig("plan: held-out scoring needs a rate below 100");
    }
    if (repetitions < 1) throw InvalidConfig("plan: repetitions must be >= 1");
    if (mu_grid.empty() || lambda_grid.empty()) throw InvalidConfig("plan: empty parameter grid");
    for (double v : mu_grid)
      if (!(v > 0.0 && std::isfinite(v))) throw InvalidConfig("plan: mu grid values must be positive");
    for (double v : lambda_grid)
      if (!(v >= 0.0 && std::isfinite(v))) throw InvalidConfig("plan: lambda grid values must be >= 0");
    if (threads < 1) throw InvalidConfig("plan: threads must be >= 1");
  }
};

inline Index count_correct(const QuadSurfaceModel& model, const Dataset& d) {
  Index ok = 0;
  for (Index i = 0; i < d.m(); ++i) ok += predict(model, d.x(i)) == static_cast<int>(d.label(i));
  return ok;
}

/// Percentage of samples labeled correctly.
inline double accuracy_score(const QuadSurfaceModel& model, const Dataset& d) {
  return 100.0 * static_cast<double>(count_correct(model, d)) / static_cast<double>(d.m());
}

namespace detail {

/// Trains `base` at every grid value of one parameter, scores on `score_on`, and returns
/// the mean of the best-scoring values. Grid points whose solve fails are skipped.
template <class Apply>
double tune_grid(const Dataset& fit, const DesignCache& cache, const Dataset& score_on, TrainConfig base,
                 const std::vector<double>& grid, Apply apply) {
  Index best = -1;
  std::vector<double> ties;
  for (double v : grid) {
    apply(base, v);
    Index ok = 0;
    try {
      ok = count_correct(train(fit, base, cache).model, score_on);
    } catch (const SolverFailure&) {
      continue;
    } catch (const HardMarginInfeasible&) {
      continue;
    }
    if (ok > best) {
      best = ok;
      ties.clear();
    }
    if (ok == best) ties.push_back(v);
  }
  if (ties.empty()) throw SolverFailure("tuning: every grid point failed");
  return std::accumulate(ties.begin(), ties.end(), 0.0) / static_cast<double>(ties.size());
}

}  // namespace detail

/// Best slack weight for SQSSVM over the plan's grid; ties resolve to their mean.
inline double tune_mu(const Dataset& fit, const Dataset& score_on, const ExperimentPlan& plan,
                      Variant variant = Variant::SQSSVM) {
  if (!is_soft(variant)) throw InvalidArgument("tune_mu: variant has no slack weight");
  TrainConfig cfg;
  cfg.variant = variant;
  cfg.solver = plan.solver;
  return detail::tune_grid(fit, assemble_design(fit), score_on, cfg, plan.mu_grid,
                           [](TrainConfig& c, double v) { c.mu = v; });
}

inline double tune_mu(const Dataset& d, const ExperimentPlan& plan) { return tune_mu(d, d, plan); }

/// Best lambda for an L1 variant at a fixed mu (ignored for the hard variant).
inline double tune_lambda(const Dataset& fit, const Dataset& score_on, const ExperimentPlan& plan, Variant variant,
                          std::optional<double> mu) {
  if (!is_l1(variant)) throw InvalidArgument("tune_lambda: variant has no l1 weight");
  TrainConfig cfg;
  cfg.variant = variant;
  cfg.mu = is_soft(variant) ? mu : std::nullopt;
  cfg.solver = plan.solver;
  return detail::tune_grid(fit, assemble_design(fit), score_on, cfg, plan.lambda_grid,
                           [](TrainConfig& c, double v) { c.lambda = v; });
}

/// One (variant, rate) cell of the results.
struct ResultRow {
  Variant variant = Variant::SVM;
  double rate = 0.0;
  double mean = 0.0, std = 0.0, min = 0.0, max = 0.0;
  double cpu_seconds = 0.0;  ///< mean training time of the final fit, tuning excluded
  int failures = 0;
  bool flagged = false;  ///< more than 10% of the repetitions failed
  std::vector<double> scores;            ///< per repetition; NaN where the repetition failed
  std::vector<double> seconds;           ///< per repetition; NaN where the repetition failed
};

struct ResultsTable {
  std::vector<ResultRow> rows;

  bool any_flagged() const {
    return std::any_of(rows.begin(), rows.end(), [](const ResultRow& r) { return r.flagged; });
  }
  const ResultRow* find(Variant v, double rate) const {
    for (const auto& r : rows)
      if (r.variant == v && r.rate == rate) return &r;
    return nullptr;
  }
};

/// Training rows for one repetition: a Fisher-Yates shuffle of all indices, truncated.
inline std::vector<Index> training_split(Index m, double rate, std::uint64_t seed) {
  std::vector<Index> idx(static_cast<std::size_t>(m));
  std::iota(idx.begin(), idx.end(), Index{0});
  Rng rng(seed);
  for (std::size_t i = idx.size(); i > 1; --i) std::swap(idx[i - 1], idx[static_cast<std::size_t>(rng.below(i))]);
  const auto k = static_cast<std::size_t>(std::llround(rate / 100.0 * static_cast<double>(m)));
  idx.resize(std::clamp<std::size_t>(k, 1, idx.size()));
  return idx;
}

inline std::uint64_t repetition_seed(std::uint64_t base, double rate, int rep) {
  return derive_seed(base, std::bit_cast<std::uint64_t>(rate), static_cast<std::uint64_t>(rep));
}

namespace detail {

struct RepOutcome {
  std::vector<double> score, seconds;  // per variant, NaN on failure
};

inline RepOutcome run_repetition(const Dataset& d, const ExperimentPlan& plan, double rate, int rep) {
  const std::size_t nv = plan.variants.size();
  RepOutcome out{std::vector<double>(nv, std::numeric_limits<double>::quiet_NaN()),
                 std::vector<double>(nv, std::numeric_limits<double>::quiet_NaN())};
  const std::vector<Index> rows = training_split(d.m(), rate, repetition_seed(plan.seed, rate, rep));
  std::optional<Dataset> fit_storage, rest_storage;
  try {
    fit_storage.emplace(d.subset(rows));
    if (plan.held_out) {
      std::vector<bool> in(static_cast<std::size_t>(d.m()), false);
      for (Index i : rows) in[static_cast<std::size_t>(i)] = true;
      std::vector<Index> rest;
      for (Index i = 0; i < d.m(); ++i)
        if (!in[static_cast<std::size_t>(i)]) rest.push_back(i);
      rest_storage.emplace(d.subset(rest));
    }
  } catch (const NotTwoClasses&) {
    return out;  // a single-class split fails every variant
  }
  const Dataset& fit = *fit_storage;
  const Dataset& tune_on = plan.held_out ? fit : d;
  const Dataset& score_on = plan.held_out ? *rest_storage : d;
  const DesignCache cache = assemble_design(fit);

  std::optional<double> sq_mu;  // shared by SQSSVM and L1-SQSSVM
  for (std::size_t v = 0; v < nv; ++v) {
    const Variant variant = plan.variants[v];
    try {
      TrainConfig cfg;
      cfg.variant = variant;
      cfg.solver = plan.solver;
      if (is_soft(variant)) {
        if (variant == Variant::SQSSVM || variant == Variant::L1SQSSVM) {
          if (!sq_mu) sq_mu = tune_mu(fit, tune_on, plan, Variant::SQSSVM);
          cfg.mu = sq_mu;
        } else {
          cfg.mu = tune_mu(fit, tune_on, plan, variant);
        }
      }
      if (is_l1(variant)) cfg.lambda = tune_lambda(fit, tune_on, plan, variant, cfg.mu);
      const TrainReport r = train(fit, cfg, cache);
      out.seconds[v] = r.solver_stats.wall_seconds;
      out.score[v] = accuracy_score(r.model, score_on);
    } catch (const Error&) {
      // recorded as a failed repetition
    }
  }
  return out;
}

inline void summarize(ResultRow& row, int repetitions) {
  std::vector<double> ok, secs;
  for (std::size_t r = 0; r < row.scores.size(); ++r)
    if (!std::isnan(row.scores[r])) {
      ok.push_back(row.scores[r]);
      secs.push_back(row.seconds[r]);
    }
  row.failures = repetitions - static_cast<int>(ok.size());
  row.flagged = row.failures * 10 > repetitions;
  if (ok.empty()) {
    row.mean = row.std = row.min = row.max = row.cpu_seconds = std::numeric_limits<double>::quiet_NaN();
    return;
  }
  const double k = static_cast<double>(ok.size());
  row.mean = std::accumulate(ok.begin(), ok.end(), 0.0) / k;
  double ss = 0.0;
  for (double s : ok) ss += (s - row.mean) * (s - row.mean);
  row.std = std::sqrt(ss / k);
  row.min = *std::min_element(ok.begin(), ok.end());
  row.max = *std::max_element(ok.begin(), ok.end());
  row.cpu_seconds = std::accumulate(secs.begin(), secs.end(), 0.0) / k;
}

}  // namespace detail

/// Repeated random-split benchmark. Each repetition's split depends only on
/// (seed, rate, repetition), so the table is the same for any thread count.
inline ResultsTable run_benchmark(const Dataset& d, const ExperimentPlan& plan, std::ostream* log = nullptr) {
  plan.validate();
  ResultsTable table;
  for (double rate : plan.training_rates) {
    std::vector<detail::RepOutcome> reps(static_cast<std::size_t>(plan.repetitions));
    std::atomic<int> next{0};
    auto worker = [&] {
      for (int r = next++; r < plan.repetitions; r = next++)
        reps[static_cast<std::size_t>(r)] = detail::run_repetition(d, plan, rate, r);
    };
    const unsigned nt = std::min<unsigned>(plan.threads, static_cast<unsigned>(plan.repetitions));
    if (nt <= 1) {
      worker();
    } else {
      std::vector<std::jthread> pool;
      for (unsigned t = 0; t < nt; ++t) pool.emplace_back(worker);
    }
    for (std::size_t v = 0; v < plan.variants.size(); ++v) {
      ResultRow row;
      row.variant = plan.variants[v];
      row.rate = rate;
      for (const auto& rep : reps) {
        row.scores.push_back(rep.score[v]);
        row.seconds.push_back(rep.seconds[v]);
      }
      detail::summarize(row, plan.repetitions);
      if (log) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "rate %g%% %-9s mean %.2f std %.2f failures %d%s\n", rate,
                      std::string(to_string(row.variant)).c_str(), row.mean, row.std, row.failures,
                      row.flagged ? " FLAGGED" : "");
        *log << buf << std::flush;
      }
      table.rows.push_back(std::move(row));
    }
  }
  return table;
}

inline std::string results_csv(const ResultsTable& t) {
  std::ostringstream os;
  os << "variant,rate,mean,std,min,max,cpu_s\n";
  char buf[256];
  for (const auto& r : t.rows) {
    std::snprintf(buf, sizeof buf, "%s,%g,%.4f,%.4f,%.4f,%.4f,%.6f\n", std::string(to_string(r.variant)).c_str(),
                  r.rate, r.mean, r.std, r.min, r.max, r.cpu_seconds);
    os << buf;
  }
  return os.str();
}

/// Aligned table grouped by rate, one variant per line.
inline std::string results_text(const ResultsTable& t) {
  std::ostringstream os;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-6s %-10s %8s %8s %8s %8s %10s %s\n", "rate", "variant", "mean", "std", "min",
                "max", "cpu_s", "failed");
  os << buf;
  for (const auto& r : t.rows) {
    std::snprintf(buf, sizeof buf, "%-6g %-10s %8.2f %8.2f %8.2f %8.2f %10.4f %d%s\n", r.rate,
                  std::string(to_string(r.variant)).c_str(), r.mean, r.std, r.min, r.max, r.cpu_seconds,
                  r.failures, r.flagged ? " (flagged)" : "");
    os << buf;
  }
  return os.str();
}

/// Per-repetition scores for auditing the aggregates.
inline std::string results_raw_csv(const ResultsTable& t) {
  std::ostringstream os;
  os << "variant,rate,repetition,score,cpu_s\n";
  char buf[256];
  for (const auto& r : t.rows)
    for (std::size_t k = 0; k < r.scores.size(); ++k) {
      std::snprintf(buf, sizeof buf, "%s,%g,%zu,%.17g,%.17g\n", std::string(to_string(r.variant)).c_str(), r.rate,
                    k, r.scores[k], r.seconds[k]);
      os << buf;
    }
  return os.str();
}

}  // namespace qssvm
