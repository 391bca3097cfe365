// Fits the ring data set with each model family and prints what they learn.

#include <cstdio>

#include "qssvm/qssvm.hpp"

int main() {
  using namespace qssvm;
  const Dataset d = gen_ring(60, 60, 42);
  const DesignCache cache = assemble_design(d);

  struct Run {
    Variant variant;
    double lambda;
    std::optional<double> mu;
  };
  const Run runs[] = {
      {Variant::SSVM, 0.0, 1.0},
      {Variant::SQSSVM, 0.0, 1.0},
      {Variant::L1SQSSVM, 1.0, 1.0},
      {Variant::L1SQSSVM, 100.0, 1.0},
      {Variant::QSSVM, 0.0, std::nullopt},
  };
  for (const Run& r : runs) {
    TrainConfig cfg;
    cfg.variant = r.variant;
    cfg.lambda = r.lambda;
    cfg.mu = r.mu;
    const TrainReport rep = train(d, cfg, cache);
    const Vector w = hvec(rep.model.W).values();
    std::printf("%-9s lambda %-5g accuracy %6.2f%%  curvature %.3f  hvec(W) = [%+.3f %+.3f %+.3f]  c = %+.3f\n",
                std::string(to_string(r.variant)).c_str(), r.lambda, accuracy_score(rep.model, d),
                curvature(rep.model), w[0], w[1], w[2], rep.model.c);
  }
  try {
    TrainConfig svm;
    svm.variant = Variant::SVM;
    train(d, svm, cache);
  } catch (const HardMarginInfeasible& e) {
    std::printf("SVM       %s\n", e.what());
  }
}
