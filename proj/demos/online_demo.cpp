// Streams separable knapsack instances through the perceptron and online
// gradient learners and prints mistakes at a few checkpoints.

#include <cstdio>

#include "mom/harness.hpp"

using namespace mom;

int main() {
  SeparableSpec spec;
  spec.problem = ProblemSpec::fk_normalized();
  spec.problem.knapsack.n_items = 4;
  spec.problem.d = 3;
  spec.min_raw_margin = 0.1;
  spec.fixed_constraints = true;
  const std::size_t T = 3000;
  const SeparableStream stream = gen_separable_stream(spec, T, 5);
  const SampleRefs data = refs_of(stream.samples);

  OnlineRunConfig perceptron;
  perceptron.algorithm = OnlineAlgorithm::Perceptron;
  OnlineRunConfig ogd;
  ogd.radius = stream.theta_bar;
  ogd.eta = 1.0;

  const auto p = online_run(data, perceptron);
  const auto o = online_run(data, ogd);
  std::printf("theta_bar %.3f  sigma_bar %.3f\n", stream.theta_bar, stream.sigma_bar);
  std::printf("%6s %12s %12s\n", "t", "perceptron", "ogd");
  for (std::size_t t : {100u, 300u, 1000u, 2000u, 3000u})
    std::printf("%6zu %12zu %12zu\n", t, p.cumulative_mistakes[t - 1],
                o.cumulative_mistakes[t - 1]);
}
