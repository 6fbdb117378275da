// mom: generate datasets, fit and score single models, run offline and
// online sweeps, and run the acceptance suite.
//
// Exit codes: 0 success, 1 configuration or input error, 2 runtime error
// (including sweeps with at least one failed trial and failed criteria).

#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "mom/acceptance.hpp"
#include "mom/dataset_io.hpp"
#include "mom/harness.hpp"
#include "mom/model_io.hpp"

using namespace mom;

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kRuntimeError = 2;

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string format = "csv";
};

void add_common(CLI::App* cmd, Common& c, bool with_config = true, bool with_format = true) {
  if (with_config) cmd->add_option("--config", c.config, "JSON experiment config");
  cmd->add_option("--seed", c.seed, "Override the config seed");
  cmd->add_option("--out", c.out, "Output file (default: stdout)");
  if (with_format)
    cmd->add_option("--format", c.format, "csv or jsonl")->check(CLI::IsMember({"csv", "jsonl"}));
}

ExperimentConfig load(const Common& c) {
  ExperimentConfig cfg = c.config.empty() ? ExperimentConfig{} : load_config(c.config);
  if (c.seed) cfg.seed = *c.seed;
  return cfg;
}

void write_rows(const std::vector<ResultRow>& rows, const Common& c) {
  const OutputFormat fmt = parse_format(c.format);
  if (c.out.empty()) {
    emit(rows, fmt, std::cout);
  } else {
    emit(rows, fmt, c.out);
  }
}

std::vector<ResultRow> evaluation_rows(const std::string& method, const std::string& hp,
                                       Family f, const Evaluation& ev) {
  return {{0, method, hp, relative_metric(f), ev.relative_loss, 0.0},
          {0, method, hp, "l-est", ev.estimate_loss, 0.0},
          {0, method, hp, "l-sub", ev.suboptimality, 0.0},
          {0, method, hp, "match-rate", ev.match_rate, 0.0}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Maximum optimality margin: inverse LP and predict-then-optimize toolkit"};
  app.require_subcommand(1);

  // gen
  Common gen_opts;
  std::size_t gen_count = 100, gen_first = 0, gen_trial = 0;
  bool gen_no_cost = false, gen_separable = false;
  auto* gen = app.add_subcommand("gen", "Write a JSON-lines dataset");
  add_common(gen, gen_opts, true, false);
  gen->add_option("--count", gen_count, "Number of samples");
  gen->add_option("--first", gen_first, "Index of the first sample");
  gen->add_option("--trial", gen_trial, "Trial whose ground truth is used");
  gen->add_flag("--no-cost", gen_no_cost, "Omit cost vectors (inverse-problem data)");
  gen->add_flag("--separable", gen_separable,
                "Separable knapsack stream using the config's online settings");

  // train
  Common train_opts;
  std::string train_data, train_method = "mom";
  Hyperparams train_hp;
  train_hp.lambda = 0.0;
  train_hp.step = 0.1;
  auto* train = app.add_subcommand("train", "Fit one method and write the model as JSON");
  add_common(train, train_opts, true, false);
  train->add_option("--data", train_data, "Training dataset")->required();
  train->add_option("--method", train_method, "Method name");
  train->add_option("--lambda", train_hp.lambda, "Regularization (0 picks 1/sqrt(T) for MOM)");
  train->add_option("--step", train_hp.step, "Step size");
  train->add_option("--radius", train_hp.radius, "Frobenius radius (0 = unconstrained)");
  train->add_option("--gamma", train_hp.gamma, "Kernel scale");
  train->add_option("--degree", train_hp.degree, "Polynomial kernel degree");

  // eval
  Common eval_opts;
  std::string eval_data, eval_model;
  auto* eval = app.add_subcommand("eval", "Score a saved model on a dataset");
  add_common(eval, eval_opts, false);
  eval->add_option("--model", eval_model, "Model JSON from `train`")->required();
  eval->add_option("--data", eval_data, "Dataset with cost vectors")->required();

  Common offline_opts, online_opts;
  auto* offline = app.add_subcommand("offline", "Tuned offline sweep over trials");
  add_common(offline, offline_opts);
  auto* online = app.add_subcommand("online", "Online regret and mistake sweep");
  add_common(online, online_opts);

  Common self_opts;
  self_opts.seed = 1;
  auto* selftest = app.add_subcommand("selftest", "Run the acceptance suite");
  add_common(selftest, self_opts, false, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*gen) {
      const ExperimentConfig cfg = load(gen_opts);
      std::vector<SupervisedSample> data;
      Family family = cfg.family;
      if (gen_separable) {
        ExperimentConfig sc = cfg;
        sc.online.T = gen_first + gen_count;
        sc.online.separable = true;
        auto stream = make_online_stream(sc, gen_trial);
        data.assign(stream.samples.begin() + static_cast<std::ptrdiff_t>(gen_first),
                    stream.samples.end());
        family = Family::Knapsack;
      } else {
        InstanceGenerator g(cfg.problem(), cfg.seed, gen_trial);
        data = g.batch(gen_first, gen_count);
      }
      const DatasetMeta meta{family, cfg.seed, cfg.noise};
      if (gen_opts.out.empty()) {
        write_dataset(std::cout, data, meta, !gen_no_cost);
      } else {
        write_dataset(gen_opts.out, data, meta, !gen_no_cost);
      }
      return kOk;
    }

    if (*train) {
      const ExperimentConfig cfg = load(train_opts);
      const MethodSpec method = parse_method(train_method);
      const Dataset ds = read_dataset(train_data);
      if (ds.samples.empty()) throw ConfigError("training dataset is empty");
      if (method.reads_costs())
        for (const auto& s : ds.samples)
          if (s.c.size() == 0) throw ConfigError(train_method + " needs cost vectors in the data");
      const std::uint64_t seed = train_opts.seed.value_or(cfg.seed);
      SavedModel saved{method.name(), describe(method, train_hp),
                       fit_method(method, train_hp, ds.samples, cfg, seed)};
      const json j = model_to_json(saved);
      if (train_opts.out.empty()) {
        std::cout << j.dump(2) << '\n';
      } else {
        write_model(saved, train_opts.out);
      }
      return kOk;
    }

    if (*eval) {
      const SavedModel saved = read_model(eval_model);
      const Dataset ds = read_dataset(eval_data);
      if (ds.samples.empty()) throw ConfigError("evaluation dataset is empty");
      for (const auto& s : ds.samples)
        if (s.c.size() == 0) throw ConfigError("evaluation needs cost vectors in the data");
      const Evaluation ev = evaluate_model(ds.meta.family, ds.samples, saved.model);
      write_rows(evaluation_rows(saved.method, saved.hyperparams, ds.meta.family, ev), eval_opts);
      return ev.mistakes == ds.samples.size() && std::isnan(ev.relative_loss) ? kRuntimeError
                                                                              : kOk;
    }

    if (*offline || *online) {
      const Common& opts = *offline ? offline_opts : online_opts;
      const ExperimentConfig cfg = load(opts);
      const SweepResult res = *offline ? run_offline_experiment(cfg) : run_online_experiment(cfg);
      write_rows(res.rows, opts);
      if (res.failed_trials) {
        std::cerr << res.failed_trials << " trial(s) failed; see rows marked error=\n";
        return kRuntimeError;
      }
      return kOk;
    }

    if (*selftest) {
      const auto outcomes = acceptance::run_suite(*self_opts.seed, [](const acceptance::Outcome& o) {
        std::cout << acceptance::status_line(o) << std::endl;
      });
      if (!self_opts.out.empty()) acceptance::write_results(outcomes, self_opts.out);
      const bool all = std::all_of(outcomes.begin(), outcomes.end(),
                                   [](const acceptance::Outcome& o) { return o.pass; });
      return all ? kOk : kRuntimeError;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const DatasetError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return kOk;
}
