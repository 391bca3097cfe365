#pragma once

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "qssvm/qssvm.hpp"

namespace qssvm::cli {

enum ExitCode : int {
  kOk = 0,
  kCheckFailed = 1,
  kIoError = 2,
  kGenerationFailed = 3,
  kInfeasible = 4,
  kSolverFailure = 5,
  kUsage = 64,
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

using Config = std::vector<std::pair<std::string, std::string>>;

inline void print_config(std::ostream& out, const std::string& command, const Config& cfg) {
  out << "[config]\ncommand = " << command << '\n';
  for (const auto& [k, v] : cfg) out << k << " = " << v << '\n';
  out << "[end config]\n";
}

inline std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

inline std::string join(const std::vector<std::string>& parts, const char* sep = ",") {
  std::string s;
  for (std::size_t i = 0; i < parts.size(); ++i) s += (i ? sep : "") + parts[i];
  return s;
}

inline Variant variant_arg(const std::string& s) {
  const auto v = parse_variant(s);
  if (!v) throw UsageError("unknown variant '" + s + "'");
  return *v;
}

inline const CLI::Validator kAtLeastOne(
    [](std::string& s) -> std::string {
      const auto v = qssvm::detail::parse_number(s);
      return v && *v >= 1.0 ? std::string() : "must be >= 1, got '" + s + "'";
    },
    ">=1");

/// "auto" or a non-negative number.
inline std::optional<double> number_or_auto(const std::string& flag, const std::string& s) {
  if (s == "auto") return std::nullopt;
  const auto v = qssvm::detail::parse_number(s);
  if (!v || *v < 0.0) throw UsageError(flag + " must be a non-negative number or 'auto', got '" + s + "'");
  return *v;
}

struct DataFlags {
  std::string path, label_column, positive_label;

  void add(CLI::App& app) {
    app.add_option("--data", path, "Labeled CSV file")->required();
    app.add_option("--label-column", label_column, "Label column name or 0-based index (default: last)");
    app.add_option("--positive-label", positive_label, "Label value mapped to +1 (default: numeric -1/1)");
  }
  Dataset load() const { return load_csv(path, {label_column, positive_label}); }
  void describe(Config& cfg) const {
    cfg.emplace_back("data", path);
    cfg.emplace_back("label_column", label_column.empty() ? "last" : label_column);
    cfg.emplace_back("positive_label", positive_label.empty() ? "1" : positive_label);
  }
};

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write " + path);
  f << text;
  if (!f) throw IoError("write failed: " + path);
}

inline nlohmann::json surface_json(const SurfaceSpec& s) {
  nlohmann::json W = nlohmann::json::array();
  for (Index i = 0; i < s.n(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Index j = 0; j < s.n(); ++j) row.push_back(s.W(i, j));
    W.push_back(row);
  }
  return {{"W", W}, {"b", std::vector<double>(s.b.data(), s.b.data() + s.b.size())}, {"c", s.c}};
}

// ---------------------------------------------------------------- generate

struct GenerateFlags {
  std::string spec = "sparse10", surface_file, out;
  Index clean = 200, noise = 0, dim = 2;
  std::optional<Index> pos, neg;
  std::uint64_t seed = 0;
  double margin = 0.5, box = 5.0, band = 0.25;
};

inline int cmd_generate(const GenerateFlags& f, std::ostream& out) {
  const std::vector<std::string> artificial{"artificial-I", "artificial-II", "artificial-III", "artificial-IV", "artificial-3D"};
  const bool is_artificial = std::find(artificial.begin(), artificial.end(), f.spec) != artificial.end();
  GenConfig g;
  g.seed = f.seed;
  g.m_pos = f.pos.value_or(f.clean);
  g.m_neg = f.neg.value_or(f.clean);
  g.noise_count = f.noise;
  g.margin = f.margin;
  g.box = f.box;
  g.noise_band = f.band;

  Config cfg{{"spec", f.surface_file.empty() ? f.spec : "file:" + f.surface_file},
             {"seed", std::to_string(f.seed)},
             {"out", f.out}};
  if (!is_artificial) {
    cfg.emplace_back("m_pos", std::to_string(g.m_pos));
    cfg.emplace_back("m_neg", std::to_string(g.m_neg));
  }
  if (!is_artificial && f.spec != "ring") {
    cfg.emplace_back("noise", std::to_string(g.noise_count));
    cfg.emplace_back("margin", num(g.margin));
    cfg.emplace_back("box", num(g.box));
    cfg.emplace_back("noise_band", num(g.noise_band));
  }
  if (f.spec == "linear" || f.spec == "quadratic") cfg.emplace_back("dim", std::to_string(f.dim));
  print_config(out, "generate", cfg);

  nlohmann::json meta{{"generator_id", kGeneratorId}, {"seed", f.seed}};
  std::optional<Dataset> d;
  std::optional<SurfaceSpec> surface;
  if (!f.surface_file.empty()) {
    const QuadSurfaceModel m = load_model(f.surface_file);
    surface = SurfaceSpec{m.W, m.b, m.c};
    meta["spec"] = "file";
  } else if (f.spec == "sparse10") {
    surface = builtin_sparse_surface();
  } else if (f.spec == "linear") {
    if (f.dim < 1) throw UsageError("--dim must be >= 1");
    surface = random_hyperplane(f.dim, f.seed);
    g.seed = derive_seed(f.seed, 1);
  } else if (f.spec == "quadratic") {
    if (f.dim < 1) throw UsageError("--dim must be >= 1");
    surface = random_quadratic_surface(f.dim, derive_seed(f.seed, 2), f.box);
    g.seed = derive_seed(f.seed, 3);
  } else if (f.spec == "ring") {
    d = gen_ring(g.m_neg, g.m_pos, f.seed);
    meta["m_inner"] = g.m_neg;
    meta["m_outer"] = g.m_pos;
  } else if (is_artificial) {
    const ArtificialSet which[] = {ArtificialSet::I, ArtificialSet::II, ArtificialSet::III, ArtificialSet::IV, ArtificialSet::ThreeD};
    const auto k = static_cast<std::size_t>(std::find(artificial.begin(), artificial.end(), f.spec) - artificial.begin());
    d = gen_artificial(which[k], f.seed);
  } else {
    throw UsageError("unknown --spec '" + f.spec + "'");
  }
  if (!meta.contains("spec")) meta["spec"] = f.spec;
  if (surface) {
    g.validate();
    d = gen_from_surface(*surface, g);
    meta["surface"] = surface_json(*surface);
    meta["m_pos"] = g.m_pos;
    meta["m_neg"] = g.m_neg;
    meta["noise_count"] = g.noise_count;
    meta["margin"] = g.margin;
    meta["box"] = g.box;
    meta["noise_band"] = g.noise_band;
    meta["sampling_seed"] = g.seed;
  }
  meta["n"] = d->n();
  meta["m"] = d->m();
  write_csv(f.out, *d);
  write_file(f.out + ".json", meta.dump(2) + "\n");
  out << "wrote " << d->m() << " samples with " << d->n() << " features to " << f.out << '\n';
  return kOk;
}

// ---------------------------------------------------------------- train

struct TrainFlags {
  DataFlags data;
  std::string variant = "L1-SQSSVM", lambda = "0", mu, model_out;
  std::vector<Index> zero_set;
};

inline TrainConfig resolve_train_config(const TrainFlags& f, const Dataset& d, Config& cfg) {
  TrainConfig tc;
  tc.variant = variant_arg(f.variant);
  cfg.emplace_back("variant", std::string(to_string(tc.variant)));
  const auto lambda = number_or_auto("--lambda", f.lambda);
  if (lambda) {
    tc.lambda = *lambda;
    cfg.emplace_back("lambda", num(tc.lambda));
  } else {
    tc.lambda = lambda_equivalence_bound(d);
    cfg.emplace_back("lambda", num(tc.lambda) + " (auto: SVM equivalence bound)");
  }
  if (is_soft(tc.variant)) {
    if (f.mu.empty()) throw UsageError(std::string(to_string(tc.variant)) + " needs --mu");
    const auto mu = number_or_auto("--mu", f.mu);
    if (mu) {
      tc.mu = *mu;
      cfg.emplace_back("mu", num(*tc.mu));
    } else {
      tc.mu = 2.0 * mu_vanishing_bound(d, tc.lambda);
      cfg.emplace_back("mu", num(*tc.mu) + " (auto: twice the vanishing-slack bound)");
    }
  } else if (!f.mu.empty()) {
    throw UsageError(std::string(to_string(tc.variant)) + " takes no --mu");
  }
  if (!f.zero_set.empty()) {
    tc.zero_set = f.zero_set;
    std::vector<std::string> parts;
    for (Index j : f.zero_set) parts.push_back(std::to_string(j));
    cfg.emplace_back("zero_set", join(parts));
  }
  tc.validate(d.n());
  return tc;
}

inline int cmd_train(const TrainFlags& f, std::ostream& out) {
  const Dataset d = f.data.load();
  Config cfg;
  f.data.describe(cfg);
  const TrainConfig tc = resolve_train_config(f, d, cfg);
  cfg.emplace_back("model_out", f.model_out.empty() ? "(none)" : f.model_out);
  print_config(out, "train", cfg);

  const TrainReport r = train(d, tc);
  if (!f.model_out.empty()) save_model(f.model_out, r.model);
  const Index h = half_size(d.n());
  const auto zeros = sparsity_pattern(r.model, 1e-6);
  out << "status = " << to_string(r.solver_stats.status) << '\n'
      << "iterations = " << r.solver_stats.iterations << '\n'
      << "objective = " << format_double(r.objective) << '\n'
      << "xi_l1 = " << format_double(r.xi.size() ? r.xi.lpNorm<1>() : 0.0) << '\n'
      << "kkt_stationarity = " << num(r.kkt.stationarity) << '\n'
      << "kkt_primal = " << num(r.kkt.primal_feasibility) << '\n'
      << "kkt_dual = " << num(r.kkt.dual_feasibility) << '\n'
      << "kkt_complementarity = " << num(r.kkt.complementarity) << '\n'
      << "curvature = " << num(curvature(r.model)) << '\n'
      << "nonzeros_w = " << (h - static_cast<Index>(zeros.size())) << " of " << h << " (tol 1e-6)\n"
      << "train_accuracy = " << num(accuracy_score(r.model, d)) << '\n';
  return kOk;
}

// ---------------------------------------------------------------- predict

struct PredictFlags {
  std::string model, data, label_column, positive_label, out;
};

inline int cmd_predict(const PredictFlags& f, std::ostream& out) {
  const QuadSurfaceModel model = load_model(f.model);
  const auto width = static_cast<Index>(csv_width(f.data));
  const bool labeled = width == model.dim() + 1;
  if (!labeled && width != model.dim())
    throw DimensionMismatch("data has " + std::to_string(width) + " columns; the model expects " +
                            std::to_string(model.dim()) + " features (plus an optional label)");
  print_config(out, "predict",
               {{"model", f.model}, {"data", f.data}, {"labeled", labeled ? "yes" : "no"},
                {"out", f.out.empty() ? "(stdout)" : f.out}});
  std::ostringstream preds;
  if (labeled) {
    const Dataset d = load_csv(f.data, {f.label_column, f.positive_label});
    for (Index i = 0; i < d.m(); ++i) preds << predict(model, d.x(i)) << '\n';
    out << "accuracy = " << num(accuracy_score(model, d)) << '\n';
  } else {
    const Matrix X = load_features_csv(f.data);
    for (Index i = 0; i < X.rows(); ++i) preds << predict(model, X.row(i).transpose()) << '\n';
  }
  if (f.out.empty())
    out << preds.str();
  else
    write_file(f.out, preds.str());
  return kOk;
}

// ---------------------------------------------------------------- tune

struct GridFlags {
  std::vector<int> mu_exp{-3, 20}, lambda_exp{-10, 25};

  void add(CLI::App& app) {
    app.add_option("--mu-exp", mu_exp, "Slack-weight grid 2^lo..2^hi")->expected(2)->delimiter(',');
    app.add_option("--lambda-exp", lambda_exp, "l1-weight grid 2^lo..2^hi")->expected(2)->delimiter(',');
  }
  void apply(ExperimentPlan& plan, Config& cfg) const {
    if (mu_exp[0] > mu_exp[1] || lambda_exp[0] > lambda_exp[1]) throw UsageError("grid ranges need lo <= hi");
    plan.mu_grid = pow2_grid(mu_exp[0], mu_exp[1]);
    plan.lambda_grid = pow2_grid(lambda_exp[0], lambda_exp[1]);
    cfg.emplace_back("mu_grid", "2^" + std::to_string(mu_exp[0]) + "..2^" + std::to_string(mu_exp[1]));
    cfg.emplace_back("lambda_grid", "2^" + std::to_string(lambda_exp[0]) + "..2^" + std::to_string(lambda_exp[1]));
  }
};

struct TuneFlags {
  DataFlags data;
  GridFlags grid;
  std::string variant = "L1-SQSSVM";
};

inline int cmd_tune(const TuneFlags& f, std::ostream& out) {
  const Dataset d = f.data.load();
  const Variant v = variant_arg(f.variant);
  if (!is_soft(v) && !is_l1(v)) throw UsageError(std::string(to_string(v)) + " has nothing to tune");
  ExperimentPlan plan;
  Config cfg;
  f.data.describe(cfg);
  cfg.emplace_back("variant", std::string(to_string(v)));
  f.grid.apply(plan, cfg);
  cfg.emplace_back("score", "accuracy on the full data set; ties take the mean");
  print_config(out, "tune", cfg);

  TrainConfig tc;
  tc.variant = v;
  if (is_soft(v)) {
    // The l1 soft model takes its slack weight from the plain soft quadratic model.
    tc.mu = tune_mu(d, d, plan, v == Variant::L1SQSSVM ? Variant::SQSSVM : v);
    out << "mu = " << format_double(*tc.mu) << '\n';
  }
  if (is_l1(v)) {
    tc.lambda = tune_lambda(d, d, plan, v, tc.mu);
    out << "lambda = " << format_double(tc.lambda) << '\n';
  }
  out << "accuracy = " << num(accuracy_score(train(d, tc).model, d)) << '\n';
  return kOk;
}

// ---------------------------------------------------------------- benchmark

struct BenchmarkFlags {
  DataFlags data;
  GridFlags grid;
  std::vector<std::string> variants{"L1-SQSSVM", "SQSSVM", "SSVM", "SVM"};
  std::vector<double> rates{10, 20, 40};
  int repetitions = 50;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  bool held_out = false;
  std::string out, raw, table;
};

inline int cmd_benchmark(const BenchmarkFlags& f, std::ostream& out, std::ostream& err) {
  const Dataset d = f.data.load();
  ExperimentPlan plan;
  plan.variants.clear();
  for (const auto& s : f.variants) plan.variants.push_back(variant_arg(s));
  plan.training_rates = f.rates;
  plan.repetitions = f.repetitions;
  plan.seed = f.seed;
  plan.threads = f.threads;
  plan.held_out = f.held_out;
  Config cfg;
  f.data.describe(cfg);
  std::vector<std::string> names, rates;
  for (Variant v : plan.variants) names.emplace_back(to_string(v));
  for (double r : plan.training_rates) rates.push_back(num(r));
  cfg.emplace_back("variants", join(names));
  cfg.emplace_back("rates", join(rates));
  cfg.emplace_back("repetitions", std::to_string(plan.repetitions));
  cfg.emplace_back("seed", std::to_string(plan.seed));
  cfg.emplace_back("threads", std::to_string(plan.threads));
  cfg.emplace_back("scoring", plan.held_out ? "held-out samples" : "full data set");
  f.grid.apply(plan, cfg);
  cfg.emplace_back("out", f.out.empty() ? "(none)" : f.out);
  cfg.emplace_back("raw", f.raw.empty() ? "(none)" : f.raw);
  try {
    plan.validate();
  } catch (const InvalidConfig& e) {
    throw UsageError(e.what());
  }
  print_config(out, "benchmark", cfg);

  const ResultsTable t = run_benchmark(d, plan, &err);
  const std::string text = results_text(t);
  out << text;
  if (!f.out.empty()) write_file(f.out, results_csv(t));
  if (!f.raw.empty()) write_file(f.raw, results_raw_csv(t));
  if (!f.table.empty()) write_file(f.table, text);
  if (t.any_flagged()) {
    out << "some cells had more than 10% failed repetitions\n";
    return kCheckFailed;
  }
  return kOk;
}

// ---------------------------------------------------------------- verify

struct VerifyFlags {
  DataFlags data;
  std::vector<std::string> checks{"assumptions", "gpd", "separability"};
  std::string model, lambda = "auto";
  bool lambda_sweep = false;
};

inline bool check_line(std::ostream& out, const std::string& name, bool pass, const std::string& detail) {
  out << "check " << name << ": " << (pass ? "PASS" : "FAIL") << "  " << detail << '\n';
  return pass;
}

inline int cmd_verify(const VerifyFlags& f, std::ostream& out) {
  const std::vector<std::string> known{"assumptions", "gpd", "separability", "kkt", "svm-equiv"};
  for (const auto& c : f.checks)
    if (std::find(known.begin(), known.end(), c) == known.end()) throw UsageError("unknown check '" + c + "'");
  const bool wants_kkt = std::find(f.checks.begin(), f.checks.end(), "kkt") != f.checks.end();
  if (wants_kkt && f.model.empty()) throw UsageError("check kkt needs --model");
  const Dataset d = f.data.load();
  Config cfg;
  f.data.describe(cfg);
  cfg.emplace_back("checks", join(f.checks));
  if (!f.model.empty()) cfg.emplace_back("model", f.model);
  cfg.emplace_back("lambda", f.lambda);
  cfg.emplace_back("lambda_sweep", f.lambda_sweep ? "yes" : "no");
  print_config(out, "verify", cfg);

  bool all = true;
  for (const auto& c : f.checks) {
    if (c == "assumptions") {
      const AssumptionCheck a = check_assumptions(d);
      all &= check_line(out, c, a.full_column_rank && a.ones_outside_columns,
                        std::string("full_column_rank=") + (a.full_column_rank ? "yes" : "no") +
                            " ones_outside_columns=" + (a.ones_outside_columns ? "yes" : "no"));
    } else if (c == "gpd") {
      const DesignCache cache = assemble_design(d);
      const bool direct = is_G_pd(cache), schur = is_G_pd_schur(cache);
      Eigen::SelfAdjointEigenSolver<Matrix> es(cache.G(), Eigen::EigenvaluesOnly);
      all &= check_line(out, c, direct && schur,
                        "min_eig=" + num(es.eigenvalues().minCoeff()) + " max_eig=" +
                            num(es.eigenvalues().maxCoeff()) + " schur_agrees=" + (direct == schur ? "yes" : "no"));
    } else if (c == "separability") {
      const auto lin = check_separability(d, SeparabilityKind::Linear);
      const auto quad = lin.kind == SeparabilityKind::Linear ? lin : check_separability(d, SeparabilityKind::Quadratic);
      all &= check_line(out, c, quad.kind != SeparabilityKind::None,
                        std::string("kind=") + to_string(quad.kind) +
                            (quad.witness ? " min_margin=" + num(quad.min_margin) : ""));
    } else if (c == "kkt") {
      const QuadSurfaceModel given = load_model(f.model);
      if (given.dim() != d.n()) throw DimensionMismatch("model and data disagree on the number of features");
      if (given.variant == Variant::RQSSVM) throw UsageError("check kkt does not support R-QSSVM models");
      TrainConfig tc;
      tc.variant = given.variant;
      tc.lambda = given.lambda;
      tc.mu = given.mu;
      const TrainReport r = train(d, tc);
      const KktReport k = verify_kkt(d, r);
      const Index h = half_size(d.n());
      Vector a(h + d.n() + 1), b(h + d.n() + 1);
      a << hvec(given.W).values(), given.b, given.c;
      b << hvec(r.model.W).values(), r.model.b, r.model.c;
      const double gap = (a - b).cwiseAbs().maxCoeff() / (1.0 + b.cwiseAbs().maxCoeff());
      all &= check_line(out, c, k.worst() <= 1e-6 && gap <= 1e-6,
                        "stationarity=" + num(k.stationarity) + " primal=" + num(k.primal_feasibility) +
                            " dual=" + num(k.dual_feasibility) + " complementarity=" + num(k.complementarity) +
                            " model_gap=" + num(gap));
    } else if (c == "svm-equiv") {
      const auto given = number_or_auto("--lambda", f.lambda);
      const double bound = given ? *given : lambda_equivalence_bound(d);
      if (f.lambda_sweep) {
        // Twelve points ending at the chosen lambda, a factor of 4 apart.
        double prev = std::numeric_limits<double>::infinity();
        bool monotone = true;
        out << "  lambda curvature w_infnorm\n";
        for (int k = 11; k >= 0; --k) {
          const double lam = bound * std::ldexp(1.0, -2 * k);
          TrainConfig tc;
          tc.variant = Variant::L1QSSVM;
          tc.lambda = lam;
          const TrainReport r = train(d, tc);
          const double curv = curvature(r.model);
          monotone &= curv <= prev + 1e-8;
          prev = curv;
          out << "  " << num(lam) << ' ' << num(curv) << ' '
              << num(hvec(r.model.W).values().cwiseAbs().maxCoeff()) << '\n';
        }
        const SvmComparison last = compare_with_svm(d, bound);
        all &= check_line(out, c, monotone && last.w_infnorm <= 1e-6 && last.b_gap <= 1e-4 && last.c_gap <= 1e-4,
                          std::string("monotone=") + (monotone ? "yes" : "no") + " w_infnorm=" +
                              num(last.w_infnorm) + " b_gap=" + num(last.b_gap) + " c_gap=" + num(last.c_gap));
      } else {
        const SvmComparison cmp = compare_with_svm(d, bound);
        all &= check_line(out, c, cmp.w_infnorm <= 1e-6 && cmp.b_gap <= 1e-4 && cmp.c_gap <= 1e-4,
                          "lambda=" + num(bound) + " w_infnorm=" + num(cmp.w_infnorm) + " b_gap=" +
                              num(cmp.b_gap) + " c_gap=" + num(cmp.c_gap));
      }
    }
  }
  return all ? kOk : kCheckFailed;
}

}  // namespace detail

/// Runs one command line (without the program name). Never throws.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
  CLI::App app{"Quadratic-surface SVM toolkit", "qssvm"};
  app.require_subcommand(1);

  detail::GenerateFlags gen;
  auto* g = app.add_subcommand("generate", "Write a synthetic data set and a JSON sidecar");
  g->add_option("--spec", gen.spec,
                "sparse10 | linear | quadratic | ring | artificial-I | artificial-II | artificial-III | artificial-IV | artificial-3D");
  g->add_option("--surface-file", gen.surface_file, "Model file whose surface generates the data")
      ->excludes(g->get_option("--spec"));
  g->add_option("--clean", gen.clean, "Clean points per class")->check(detail::kAtLeastOne);
  g->add_option("--pos", gen.pos, "Override the +1 count")->check(detail::kAtLeastOne);
  g->add_option("--neg", gen.neg, "Override the -1 count")->check(detail::kAtLeastOne);
  g->add_option("--noise", gen.noise, "Random-label points near the surface")->check(CLI::NonNegativeNumber);
  g->add_option("--dim", gen.dim, "Dimension for the random linear/quadratic specs");
  g->add_option("--seed", gen.seed);
  g->add_option("--margin", gen.margin)->check(CLI::PositiveNumber);
  g->add_option("--box", gen.box)->check(CLI::PositiveNumber);
  g->add_option("--noise-band", gen.band)->check(CLI::PositiveNumber);
  g->add_option("-o,--out", gen.out, "Output CSV")->required();

  detail::TrainFlags tr;
  auto* t = app.add_subcommand("train", "Train one model and report its diagnostics");
  tr.data.add(*t);
  t->add_option("--variant", tr.variant, "SVM SSVM QSSVM SQSSVM L1-QSSVM L1-SQSSVM R-QSSVM");
  t->add_option("--lambda", tr.lambda, "l1 weight, or 'auto' for the SVM equivalence bound");
  t->add_option("--mu", tr.mu, "Slack weight, or 'auto' for twice the vanishing-slack bound");
  t->add_option("--zero-set", tr.zero_set, "hvec indices forced to zero (R-QSSVM)")->delimiter(',');
  t->add_option("-o,--model", tr.model_out, "Write the trained model here");

  detail::PredictFlags pr;
  auto* p = app.add_subcommand("predict", "Label samples with a saved model");
  p->add_option("--model", pr.model)->required();
  p->add_option("--data", pr.data, "CSV with n feature columns, optionally plus a label column")->required();
  p->add_option("--label-column", pr.label_column);
  p->add_option("--positive-label", pr.positive_label);
  p->add_option("-o,--out", pr.out, "Write one predicted label per line here");

  detail::TuneFlags tu;
  auto* u = app.add_subcommand("tune", "Grid-search mu and lambda on a data set");
  tu.data.add(*u);
  tu.grid.add(*u);
  u->add_option("--variant", tu.variant);

  detail::BenchmarkFlags be;
  auto* b = app.add_subcommand("benchmark", "Repeated random-split accuracy benchmark");
  be.data.add(*b);
  be.grid.add(*b);
  b->add_option("--variants", be.variants)->delimiter(',');
  b->add_option("--rates", be.rates, "Training percentages")->delimiter(',');
  b->add_option("--repetitions", be.repetitions)->check(detail::kAtLeastOne);
  b->add_option("--seed", be.seed);
  b->add_option("--threads", be.threads)->check(detail::kAtLeastOne);
  b->add_flag("--held-out", be.held_out, "Tune on the training subset and score on the rest");
  b->add_option("-o,--out", be.out, "Results CSV");
  b->add_option("--raw", be.raw, "Per-repetition scores CSV");
  b->add_option("--table", be.table, "Plain-text table file");

  detail::VerifyFlags ve;
  auto* v = app.add_subcommand("verify", "Run diagnostic checks on a data set");
  ve.data.add(*v);
  v->add_option("--check", ve.checks, "assumptions,gpd,separability,kkt,svm-equiv")->delimiter(',');
  v->add_option("--model", ve.model, "Model file for the kkt check");
  v->add_option("--lambda", ve.lambda, "lambda for svm-equiv (default: the equivalence bound)");
  v->add_flag("--lambda-sweep", ve.lambda_sweep, "List curvature over a lambda grid");

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(std::move(rev));
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kUsage;
  }

  try {
    if (g->parsed()) return detail::cmd_generate(gen, out);
    if (t->parsed()) return detail::cmd_train(tr, out);
    if (p->parsed()) return detail::cmd_predict(pr, out);
    if (u->parsed()) return detail::cmd_tune(tu, out);
    if (b->parsed()) return detail::cmd_benchmark(be, out, err);
    if (v->parsed()) return detail::cmd_verify(ve, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const InvalidArgument& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const InvalidConfig& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const RejectionBudgetExceeded& e) {
    err << "generation failed: " << e.what() << '\n';
    return kGenerationFailed;
  } catch (const HardMarginInfeasible& e) {
    err << "infeasible: " << e.what() << '\n';
    return kInfeasible;
  } catch (const NotLinearlySeparable& e) {
    err << "infeasible: " << e.what() << '\n';
    return kInfeasible;
  } catch (const NotQuadraticallySeparable& e) {
    err << "infeasible: " << e.what() << '\n';
    return kInfeasible;
  } catch (const SolverFailure& e) {
    err << "solver failure: " << e.what() << '\n';
    return kSolverFailure;
  } catch (const Error& e) {
    // IoError, ParseError, NotTwoClasses, EmptyDataset, DimensionMismatch
    err << "input error: " << e.what() << '\n';
    return kIoError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kSolverFailure;
  }
  return kUsage;
}

}  // namespace qssvm::cli
