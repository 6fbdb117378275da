// Learns shortest-path edge costs from observed optimal paths alone and
// compares the recovered decisions with OLS, which sees the costs.

#include <cstdio>

#include "mom/harness.hpp"

using namespace mom;

int main() {
  ExperimentConfig cfg;
  cfg.family = Family::ShortestPath;
  cfg.noise.deg = 6;

  InstanceGenerator gen(cfg.problem(), 2024);
  const auto train = gen.batch(0, 400);
  const auto test = gen.batch(400, 1000);

  // MOM only reads x_star; the costs in `train` are never touched.
  Hyperparams mom_hp;
  mom_hp.lambda = 1e-3;
  const auto mom = fit_method({MethodKind::Mom}, mom_hp, train, cfg, 1);
  const auto ols = fit_method({MethodKind::Ols}, {}, train, cfg, 1);

  for (const auto& [name, model] : {std::pair{"mom", &mom}, std::pair{"ols", &ols}}) {
    const Evaluation ev = evaluate_model(cfg.family, test, *model);
    std::printf("%-4s  relative loss %.5f  exact path %.1f%%\n", name, ev.relative_loss,
                100.0 * ev.match_rate);
  }
}
