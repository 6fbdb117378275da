#pragma once

// Experiment orchestration: JSON configs, grid tuning on a validation
// split, offline and online sweeps over seeded trials, and tidy result rows
// written as CSV or JSON lines.

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "mom/baselines.hpp"
#include "mom/datagen.hpp"
#include "mom/features.hpp"
#include "mom/margin.hpp"
#include "mom/mom.hpp"
#include "mom/online.hpp"

namespace mom {

using json = nlohmann::json;

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// -------------------------------------------------------------- methods

enum class MethodKind {
  Mom,
  MomOgd,
  MomPerceptron,
  MomFtrl,
  NaiveSuboptOgd,
  Ols,
  Ridge,
  SpoPlus,
  MomKernel
};

struct MethodSpec {
  MethodKind kind = MethodKind::Mom;
  KernelKind kernel = KernelKind::Rbf;  ///< only read by MomKernel

  std::string name() const {
    switch (kind) {
      case MethodKind::Mom: return "mom";
      case MethodKind::MomOgd: return "mom-ogd";
      case MethodKind::MomPerceptron: return "mom-perceptron";
      case MethodKind::MomFtrl: return "mom-ftrl";
      case MethodKind::NaiveSuboptOgd: return "naive-subopt-ogd";
      case MethodKind::Ols: return "ols";
      case MethodKind::Ridge: return "ridge";
      case MethodKind::SpoPlus: return "spo-plus";
      case MethodKind::MomKernel: return std::string("mom-kernel-") + to_string(kernel);
    }
    return "unknown";
  }

  bool reads_costs() const {
    return kind == MethodKind::Ols || kind == MethodKind::Ridge || kind == MethodKind::SpoPlus;
  }
  bool is_online() const {
    return kind == MethodKind::MomOgd || kind == MethodKind::MomPerceptron ||
           kind == MethodKind::MomFtrl || kind == MethodKind::NaiveSuboptOgd;
  }
};

inline MethodSpec parse_method(const std::string& s) {
  static const std::pair<const char*, MethodKind> table[] = {
      {"mom", MethodKind::Mom},
      {"mom-ogd", MethodKind::MomOgd},
      {"mom-perceptron", MethodKind::MomPerceptron},
      {"mom-ftrl", MethodKind::MomFtrl},
      {"naive-subopt-ogd", MethodKind::NaiveSuboptOgd},
      {"ols", MethodKind::Ols},
      {"ridge", MethodKind::Ridge},
      {"spo-plus", MethodKind::SpoPlus}};
  for (const auto& [name, kind] : table)
    if (s == name) return {kind};
  const std::string prefix = "mom-kernel-";
  if (s.rfind(prefix, 0) == 0) {
    try {
      return {MethodKind::MomKernel, parse_kernel_kind(s.substr(prefix.size()))};
    } catch (const std::invalid_argument&) {
    }
  }
  throw ConfigError("unknown method '" + s + "'");
}

inline OnlineAlgorithm online_algorithm(MethodKind k) {
  switch (k) {
    case MethodKind::MomOgd: return OnlineAlgorithm::Ogd;
    case MethodKind::MomPerceptron: return OnlineAlgorithm::Perceptron;
    case MethodKind::MomFtrl: return OnlineAlgorithm::Ftrl;
    case MethodKind::NaiveSuboptOgd: return OnlineAlgorithm::NaiveSuboptOgd;
    default: throw ConfigError("method is not an online learner");
  }
}

// ------------------------------------------------------- hyperparameters

struct Hyperparams {
  double lambda = 0.0;
  double step = 0.0;
  double radius = 0.0;
  double gamma = 1.0;
  int degree = 2;
};

inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw std::invalid_argument("not a number: '" + s + "'");
  return v;
}

/// Only the fields the method reads, as "key=value" joined by ';'.
inline std::string describe(const MethodSpec& m, const Hyperparams& h) {
  std::vector<std::pair<std::string, std::string>> kv;
  auto add = [&](const char* k, double v) { kv.emplace_back(k, format_double(v)); };
  switch (m.kind) {
    case MethodKind::Mom: add("lambda", h.lambda); add("radius", h.radius); break;
    case MethodKind::MomOgd: add("step", h.step); add("radius", h.radius); break;
    case MethodKind::MomFtrl: add("radius", h.radius); break;
    case MethodKind::NaiveSuboptOgd: add("step", h.step); break;
    case MethodKind::Ridge: add("lambda", h.lambda); break;
    case MethodKind::SpoPlus: add("step", h.step); add("lambda", h.lambda); break;
    case MethodKind::MomKernel:
      add("lambda", h.lambda);
      add("gamma", h.gamma);
      if (m.kernel == KernelKind::Polynomial) add("degree", h.degree);
      break;
    case MethodKind::MomPerceptron:
    case MethodKind::Ols: break;
  }
  std::string out;
  for (const auto& [k, v] : kv) out += (out.empty() ? "" : ";") + k + "=" + v;
  return out;
}

struct Grids {
  std::vector<double> lambda{1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0};
  std::vector<double> step{1e-3, 1e-2, 1e-1, 1.0, 10.0};
  std::vector<double> radius{0.0};
  std::vector<double> gamma{0.1, 0.5, 1.0, 2.0, 3.0, 4.0, 5.0};
  std::vector<int> degree{1, 2, 3, 4};
};

/// Every candidate the method is tuned over, in ascending lexicographic
/// order of (lambda, step, radius, gamma, degree).
inline std::vector<Hyperparams> candidates(const MethodSpec& m, const Grids& g,
                                           double spo_lambda) {
  auto sorted = [](auto v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
  };
  const auto lambdas = sorted(g.lambda);
  const auto steps = sorted(g.step);
  const auto radii = sorted(g.radius);
  const auto gammas = sorted(g.gamma);
  const auto degrees = sorted(g.degree);
  std::vector<Hyperparams> out;
  switch (m.kind) {
    case MethodKind::Mom:
      for (double l : lambdas)
        for (double r : radii) out.push_back({l, 0.0, r});
      break;
    case MethodKind::MomOgd:
      for (double s : steps)
        for (double r : radii) out.push_back({0.0, s, r});
      break;
    case MethodKind::MomFtrl:
      for (double r : radii) out.push_back({0.0, 0.0, r});
      break;
    case MethodKind::NaiveSuboptOgd:
      for (double s : steps) out.push_back({0.0, s});
      break;
    case MethodKind::Ridge:
      for (double l : lambdas) out.push_back({l});
      break;
    case MethodKind::SpoPlus:
      for (double s : steps) out.push_back({spo_lambda, s});
      break;
    case MethodKind::MomKernel:
      for (double l : lambdas)
        for (double ga : gammas) {
          if (m.kernel == KernelKind::Polynomial) {
            for (int dg : degrees) out.push_back({l, 0.0, 0.0, ga, dg});
          } else if (m.kernel == KernelKind::Rbf) {
            out.push_back({l, 0.0, 0.0, ga});
          } else {
            out.push_back({l});
            break;
          }
        }
      break;
    case MethodKind::MomPerceptron:
    case MethodKind::Ols:
      out.push_back({});
      break;
  }
  return out;
}

// ---------------------------------------------------------------- config

struct OnlineSettings {
  std::size_t T = 1000;
  bool separable = true;
  double min_raw_margin = 0.1;
  bool fixed_constraints = true;
  Index n_items = 4;
  Index d = 3;
  double eta = 1.0;        ///< step for mom-ogd; 0 uses the regret-bound step
  double naive_eta = 1.0;  ///< base step for naive-subopt-ogd (decays as 1/sqrt(t))
  std::size_t checkpoints = 10;
};

struct ExperimentConfig {
  Family family = Family::ShortestPath;
  NoiseSpec noise;
  Index d = 0;  ///< 0 picks the family default
  bool normalize_covariates = false;
  std::size_t T_train = 1000;
  std::size_t T_test = 1000;
  std::size_t trials = 1;
  std::uint64_t seed = 0;
  std::vector<MethodSpec> methods{{MethodKind::Mom}, {MethodKind::Ols}};
  Grids grids;
  double validation_fraction = 0.2;
  std::size_t mom_max_epochs = 300;
  double mom_tol = 1e-4;
  double spo_lambda = 0.0;
  std::size_t spo_steps = 2000;
  std::size_t spo_batch = 5;
  bool online_final_iterate = true;  ///< false evaluates a uniformly drawn iterate
  std::size_t workers = 1;
  bool timings = false;
  OnlineSettings online;

  ProblemSpec problem() const {
    ProblemSpec p = family == Family::ShortestPath ? ProblemSpec::sp_default(noise.deg)
                                                   : ProblemSpec::fk_default(noise.deg);
    p.noise = noise;
    if (d > 0) p.d = d;
    p.normalize_covariates = normalize_covariates;
    if (family == Family::Knapsack && normalize_covariates) {
      p.knapsack.price_mode = PriceMode::Uniform01;
      p.knapsack.scale_budget_row = true;
    }
    return p;
  }

  void validate() const {
    if (trials < 1) throw ConfigError("trials must be >= 1");
    if (!(validation_fraction > 0.0 && validation_fraction < 1.0))
      throw ConfigError("validation_fraction must lie in (0, 1)");
    if (T_train < 2 || T_test < 1) throw ConfigError("need T_train >= 2 and T_test >= 1");
    if (methods.empty()) throw ConfigError("methods must be nonempty");
    if (grids.lambda.empty() || grids.step.empty() || grids.radius.empty() ||
        grids.gamma.empty() || grids.degree.empty())
      throw ConfigError("hyperparameter grids must be nonempty");
    for (double l : grids.lambda)
      if (!(l > 0.0)) throw ConfigError("lambda grid values must be > 0");
    for (double s : grids.step)
      if (!(s > 0.0)) throw ConfigError("step grid values must be > 0");
    for (double r : grids.radius)
      if (!(r >= 0.0)) throw ConfigError("radius grid values must be >= 0");
    try {
      noise.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    if (online.T < 1) throw ConfigError("online.T must be >= 1");
  }
};

namespace detail {

template <class T>
void read_field(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

}  // namespace detail

inline ExperimentConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  static const char* known[] = {"family", "deg", "noise", "d", "normalize_covariates",
                                "T_train", "T_test", "trials", "seed", "methods", "grids",
                                "validation_fraction", "mom_max_epochs", "mom_tol",
                                "spo_lambda", "spo_steps", "spo_batch",
                                "online_final_iterate", "workers", "timings", "online"};
  for (const auto& [key, _] : j.items())
    if (std::find_if(std::begin(known), std::end(known),
                     [&](const char* k) { return key == k; }) == std::end(known))
      throw ConfigError("unknown config key '" + key + "'");

  ExperimentConfig c;
  if (j.contains("family")) {
    try {
      c.family = parse_family(j["family"].get<std::string>());
    } catch (const std::exception& e) {
      throw ConfigError(e.what());
    }
  }
  detail::read_field(j, "deg", c.noise.deg);
  if (j.contains("noise")) {
    const json& n = j["noise"];
    detail::read_field(n, "deg", c.noise.deg);
    detail::read_field(n, "eps_bar", c.noise.eps_bar);
    detail::read_field(n, "alpha_bar", c.noise.alpha_bar);
    detail::read_field(n, "eta_bar", c.noise.eta_bar);
  }
  detail::read_field(j, "d", c.d);
  detail::read_field(j, "normalize_covariates", c.normalize_covariates);
  detail::read_field(j, "T_train", c.T_train);
  detail::read_field(j, "T_test", c.T_test);
  detail::read_field(j, "trials", c.trials);
  detail::read_field(j, "seed", c.seed);
  if (j.contains("methods")) {
    c.methods.clear();
    for (const auto& m : j["methods"]) {
      if (!m.is_string()) throw ConfigError("methods must be strings");
      c.methods.push_back(parse_method(m.get<std::string>()));
    }
  }
  if (j.contains("grids")) {
    const json& g = j["grids"];
    detail::read_field(g, "lambda", c.grids.lambda);
    detail::read_field(g, "step", c.grids.step);
    detail::read_field(g, "radius", c.grids.radius);
    detail::read_field(g, "gamma", c.grids.gamma);
    detail::read_field(g, "degree", c.grids.degree);
  }
  detail::read_field(j, "validation_fraction", c.validation_fraction);
  detail::read_field(j, "mom_max_epochs", c.mom_max_epochs);
  detail::read_field(j, "mom_tol", c.mom_tol);
  detail::read_field(j, "spo_lambda", c.spo_lambda);
  detail::read_field(j, "spo_steps", c.spo_steps);
  detail::read_field(j, "spo_batch", c.spo_batch);
  detail::read_field(j, "online_final_iterate", c.online_final_iterate);
  detail::read_field(j, "workers", c.workers);
  detail::read_field(j, "timings", c.timings);
  if (j.contains("online")) {
    const json& o = j["online"];
    detail::read_field(o, "T", c.online.T);
    detail::read_field(o, "separable", c.online.separable);
    detail::read_field(o, "min_raw_margin", c.online.min_raw_margin);
    detail::read_field(o, "fixed_constraints", c.online.fixed_constraints);
    detail::read_field(o, "n_items", c.online.n_items);
    detail::read_field(o, "d", c.online.d);
    detail::read_field(o, "eta", c.online.eta);
    detail::read_field(o, "naive_eta", c.online.naive_eta);
    detail::read_field(o, "checkpoints", c.online.checkpoints);
  }
  c.validate();
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config '" + path + "'");
  try {
    return config_from_json(json::parse(is));
  } catch (const json::parse_error& e) {
    throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
  }
}

// ----------------------------------------------------------------- rows

struct ResultRow {
  std::size_t trial = 0;
  std::string method;
  std::string hyperparams;
  std::string metric;
  double value = 0.0;
  double runtime_ms = 0.0;

  bool operator==(const ResultRow& o) const {
    auto same = [](double a, double b) { return a == b || (std::isnan(a) && std::isnan(b)); };
    return trial == o.trial && method == o.method && hyperparams == o.hyperparams &&
           metric == o.metric && same(value, o.value) && same(runtime_ms, o.runtime_ms);
  }
};

inline void sort_rows(std::vector<ResultRow>& rows) {
  std::stable_sort(rows.begin(), rows.end(), [](const ResultRow& a, const ResultRow& b) {
    if (a.trial != b.trial) return a.trial < b.trial;
    return a.method < b.method;
  });
}

enum class OutputFormat { Csv, Jsonl };

inline OutputFormat parse_format(const std::string& s) {
  if (s == "csv") return OutputFormat::Csv;
  if (s == "jsonl") return OutputFormat::Jsonl;
  throw ConfigError("unknown format '" + s + "' (expected csv or jsonl)");
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

inline void emit_csv(const std::vector<ResultRow>& rows, std::ostream& os) {
  os << "trial,method,hyperparams,metric,value,runtime_ms\r\n";
  for (const auto& r : rows)
    os << r.trial << ',' << csv_field(r.method) << ',' << csv_field(r.hyperparams) << ','
       << csv_field(r.metric) << ',' << format_double(r.value) << ','
       << format_double(r.runtime_ms) << "\r\n";
}

inline void emit_jsonl(const std::vector<ResultRow>& rows, std::ostream& os) {
  for (const auto& r : rows) {
    nlohmann::ordered_json j;
    j["trial"] = r.trial;
    j["method"] = r.method;
    j["hyperparams"] = r.hyperparams;
    j["metric"] = r.metric;
    j["value"] = std::isfinite(r.value) ? nlohmann::ordered_json(r.value)
                                        : nlohmann::ordered_json(format_double(r.value));
    j["runtime_ms"] = r.runtime_ms;
    os << j.dump() << '\n';
  }
}

inline void emit(const std::vector<ResultRow>& rows, OutputFormat fmt, std::ostream& os) {
  if (fmt == OutputFormat::Csv) emit_csv(rows, os);
  else emit_jsonl(rows, os);
}

inline void emit(const std::vector<ResultRow>& rows, OutputFormat fmt,
                 const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  emit(rows, fmt, os);
  os.flush();
  if (!os) throw std::runtime_error("write to '" + path + "' failed");
}

/// RFC 4180 records; quoted fields may contain separators and line breaks.
inline std::vector<std::vector<std::string>> parse_csv_records(std::istream& is) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false, any = false;
  char ch;
  auto end_field = [&] {
    record.push_back(field);
    field.clear();
  };
  while (is.get(ch)) {
    any = true;
    if (quoted) {
      if (ch == '"') {
        if (is.peek() == '"') {
          is.get(ch);
          field += '"';
        } else {
          quoted = false;
        }
      } else {
        field += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      end_field();
    } else if (ch == '\r' || ch == '\n') {
      if (ch == '\r' && is.peek() == '\n') is.get(ch);
      end_field();
      records.push_back(std::move(record));
      record.clear();
      any = false;
    } else {
      field += ch;
    }
  }
  if (quoted) throw std::runtime_error("unterminated quoted CSV field");
  if (any) {
    end_field();
    records.push_back(std::move(record));
  }
  return records;
}

inline std::vector<ResultRow> parse_csv(std::istream& is) {
  const auto records = parse_csv_records(is);
  if (records.empty()) throw std::runtime_error("CSV has no header");
  std::vector<ResultRow> rows;
  for (std::size_t k = 1; k < records.size(); ++k) {
    const auto& f = records[k];
    if (f.size() != 6) throw std::runtime_error("CSV record " + std::to_string(k) + " has " +
                                                std::to_string(f.size()) + " fields");
    rows.push_back({std::stoull(f[0]), f[1], f[2], f[3], parse_double(f[4]),
                    parse_double(f[5])});
  }
  return rows;
}

inline std::vector<ResultRow> parse_jsonl(std::istream& is) {
  std::vector<ResultRow> rows;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const json j = json::parse(line);
    const json& v = j.at("value");
    rows.push_back({j.at("trial").get<std::size_t>(), j.at("method").get<std::string>(),
                    j.at("hyperparams").get<std::string>(), j.at("metric").get<std::string>(),
                    v.is_string() ? parse_double(v.get<std::string>()) : v.get<double>(),
                    j.at("runtime_ms").get<double>()});
  }
  return rows;
}

// ------------------------------------------------------------ evaluation

struct Evaluation {
  double relative_loss = 0.0;
  double estimate_loss = 0.0;
  double suboptimality = 0.0;
  double match_rate = 0.0;
  std::size_t mistakes = 0;
};

/// Relative loss of a decision against the true cost of the sample; the
/// knapsack form scores utilities, i.e. the negated LP cost.
inline double relative_loss(Family f, const SupervisedSample& s, const Vector& x) {
  return f == Family::ShortestPath ? relative_loss_sp(s.c, x, s.sample.x_star)
                                   : relative_loss_fk(-s.c, x, s.sample.x_star);
}

/// Scores predicted objectives (one per test sample) on the test set. A
/// failed solve counts as a mistake with NaN losses.
inline Evaluation evaluate_predictions(Family f, SupervisedSpan test,
                                       const std::function<Vector(std::size_t)>& predict,
                                       const SolverOptions& opts = {}) {
  Evaluation ev;
  const double T = static_cast<double>(test.size());
  for (std::size_t t = 0; t < test.size(); ++t) {
    const SupervisedSample& s = test[t];
    const Vector c_hat = predict(t);
    const LPResult res = solve_lp({c_hat, s.sample.A, s.sample.b}, opts);
    const LPResult sol = res.ok() || res.status != SolveStatus::Degenerate
                             ? res
                             : solve_lp({c_hat, s.sample.A, s.sample.b},
                                        opts.with_perturbation());
    if (!sol.ok()) {
      ++ev.mistakes;
      ev.relative_loss = ev.estimate_loss = ev.suboptimality =
          std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    const Vector& x = sol.get().x;
    if (!same_solution(x, s.sample.x_star)) ++ev.mistakes;
    ev.relative_loss += relative_loss(f, s, x) / T;
    ev.estimate_loss += estimate_loss(s.c, x, s.sample.x_star) / T;
    ev.suboptimality += (c_hat.dot(s.sample.x_star) - c_hat.dot(x)) / T;
  }
  ev.match_rate = 1.0 - static_cast<double>(ev.mistakes) / T;
  return ev;
}

inline Evaluation evaluate_theta(Family f, SupervisedSpan test, const Matrix& theta,
                                 const KernelTransformer* features = nullptr) {
  return evaluate_predictions(f, test, [&](std::size_t t) -> Vector {
    const Vector& z = test[t].sample.z;
    return features ? Vector(theta * (*features)(z)) : Vector(theta * z);
  });
}

// -------------------------------------------------------------- fitting

struct FittedModel {
  Matrix theta;
  std::optional<KernelTransformer> features;
};

inline SampleRefs refs_of(SupervisedSpan data) {
  SampleRefs refs;
  refs.reserve(data.size());
  for (const auto& s : data) refs.push_back(&s.sample);
  return refs;
}

inline FittedModel fit_method(const MethodSpec& m, const Hyperparams& h, SupervisedSpan train,
                              const ExperimentConfig& cfg, std::uint64_t seed) {
  MomFitConfig mom;
  mom.lambda = h.lambda;
  mom.radius = h.radius;
  mom.max_iters = cfg.mom_max_epochs;
  mom.tol_objective = cfg.mom_tol;
  mom.seed = seed;
  switch (m.kind) {
    case MethodKind::Mom: return {mom_fit(refs_of(train), mom).theta_hat.theta, std::nullopt};
    case MethodKind::MomKernel: {
      KernelSpec ks{m.kernel, h.gamma, h.degree, true};
      auto kd = kernelize_dataset(refs_of(train), ks);
      const SpanCoordinates span = span_coordinates(sample_refs(kd.samples));
      Matrix theta = span.lift(mom_fit(sample_refs(span.samples), mom).theta_hat.theta);
      return {std::move(theta), std::move(kd.transformer)};
    }
    case MethodKind::Ols: return {ols_fit(train).theta_hat.theta, std::nullopt};
    case MethodKind::Ridge: return {ridge_fit(train, h.lambda).theta_hat.theta, std::nullopt};
    case MethodKind::SpoPlus: {
      SpoPlusConfig sc;
      sc.step = h.step;
      sc.lambda = h.lambda;
      sc.steps = cfg.spo_steps;
      sc.batch = cfg.spo_batch;
      sc.seed = seed;
      return {spo_plus_fit(train, sc).theta_hat.theta, std::nullopt};
    }
    case MethodKind::MomOgd:
    case MethodKind::MomPerceptron:
    case MethodKind::MomFtrl:
    case MethodKind::NaiveSuboptOgd: {
      OnlineRunConfig oc;
      oc.algorithm = online_algorithm(m.kind);
      oc.eta = h.step > 0.0 ? h.step : 1.0;
      oc.radius = h.radius;
      oc.decay = m.kind == MethodKind::NaiveSuboptOgd ? StepDecay::InverseSqrt
                                                      : StepDecay::Constant;
      oc.record_trajectory = !cfg.online_final_iterate;
      oc.ftrl_max_epochs = cfg.mom_max_epochs;
      oc.ftrl_tol = cfg.mom_tol;
      oc.seed = seed;
      const auto run = online_run(refs_of(train), oc);
      if (cfg.online_final_iterate) return {run.thetas.back(), std::nullopt};
      Rng pick(seed);
      const auto k = pick.uniform_int(0, static_cast<std::int64_t>(run.thetas.size()) - 1);
      return {run.thetas[static_cast<std::size_t>(k)], std::nullopt};
    }
  }
  throw ConfigError("unhandled method");
}

inline Evaluation evaluate_model(Family f, SupervisedSpan test, const FittedModel& model) {
  return evaluate_theta(f, test, model.theta, model.features ? &*model.features : nullptr);
}

namespace detail {

// Validation losses for MOM-type candidates. Candidates sharing a feature
// map reuse one kernelization and one warm-started dual solver across the
// regularization path.
inline void tune_margin_path(const MethodSpec& m, const std::vector<Hyperparams>& grid,
                             SupervisedSpan train, SupervisedSpan validation,
                             const ExperimentConfig& cfg, std::uint64_t seed, Family f,
                             std::vector<double>& losses) {
  const bool kernel = m.kind == MethodKind::MomKernel;
  auto same_map = [&](const Hyperparams& a, const Hyperparams& b) {
    return !kernel || (a.gamma == b.gamma && a.degree == b.degree);
  };
  std::vector<bool> done(grid.size(), false);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (done[i]) continue;
    std::optional<KernelizedData> kd;
    std::optional<SpanCoordinates> span;
    SampleRefs refs = refs_of(train);
    try {
      if (kernel) {
        kd = kernelize_dataset(refs, KernelSpec{m.kernel, grid[i].gamma, grid[i].degree, true});
        span = span_coordinates(sample_refs(kd->samples));
        refs = sample_refs(span->samples);
      }
    } catch (const std::exception&) {
      for (std::size_t j = i; j < grid.size(); ++j)
        if (same_map(grid[i], grid[j])) done[j] = true;
      continue;
    }
    MarginDualSolver solver(refs.front()->n(), refs.front()->d(), seed);
    for (const auto* s : refs) solver.add(s);
    for (std::size_t j = i; j < grid.size(); ++j) {
      if (done[j] || !same_map(grid[i], grid[j])) continue;
      done[j] = true;
      MomFitConfig mc;
      mc.lambda = grid[j].lambda;
      mc.radius = grid[j].radius;
      mc.max_iters = cfg.mom_max_epochs;
      mc.tol_objective = cfg.mom_tol;
      mc.seed = seed;
      try {
        Matrix theta = fit_dual(refs, mc, grid[j].lambda, &solver).theta_hat.theta;
        if (span) theta = span->lift(theta);
        losses[j] =
            evaluate_theta(f, validation, theta, kd ? &kd->transformer : nullptr).relative_loss;
      } catch (const std::exception&) {
      }
    }
  }
}

}  // namespace detail

/// Index of the first smallest finite loss, or nullopt when none is finite.
inline std::optional<std::size_t> first_minimum(const std::vector<double>& losses) {
  std::optional<std::size_t> best;
  for (std::size_t k = 0; k < losses.size(); ++k)
    if (std::isfinite(losses[k]) && (!best || losses[k] < losses[*best])) best = k;
  return best;
}

/// Exhaustive search over the candidates in order; the first candidate with
/// the smallest finite validation loss wins. Failing candidates are skipped,
/// and if all fail the first candidate is returned.
inline Hyperparams tune(const MethodSpec& m, const std::vector<Hyperparams>& grid,
                        SupervisedSpan train, SupervisedSpan validation,
                        const ExperimentConfig& cfg, std::uint64_t seed, Family f) {
  if (grid.empty()) throw ConfigError("empty hyperparameter grid");
  if (grid.size() == 1) return grid.front();
  std::vector<double> losses(grid.size(), std::numeric_limits<double>::quiet_NaN());
  if (m.kind == MethodKind::Mom || m.kind == MethodKind::MomKernel) {
    detail::tune_margin_path(m, grid, train, validation, cfg, seed, f, losses);
  } else {
    for (std::size_t k = 0; k < grid.size(); ++k) {
      try {
        losses[k] =
            evaluate_model(f, validation, fit_method(m, grid[k], train, cfg, seed)).relative_loss;
      } catch (const std::exception&) {
      }
    }
  }
  return grid[first_minimum(losses).value_or(0)];
}

// ------------------------------------------------------------- workers

/// Runs job(0..count-1) on up to `workers` threads and returns the results
/// in index order.
template <class R>
std::vector<R> run_indexed(std::size_t count, std::size_t workers,
                           const std::function<R(std::size_t)>& job) {
  std::vector<R> out(count);
  workers = std::max<std::size_t>(1, std::min(workers, count));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) out[i] = job(i);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr failure;
  std::mutex failure_mutex;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          out[i] = job(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return out;
}

inline const char* relative_metric(Family f) {
  return f == Family::ShortestPath ? "rel-loss-sp" : "rel-loss-fk";
}

struct SweepResult {
  std::vector<ResultRow> rows;
  std::size_t failed_trials = 0;
};

inline std::vector<ResultRow> error_rows(std::size_t trial, const std::string& method,
                                         const std::string& what, Family f) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<ResultRow> rows;
  for (const char* metric : {relative_metric(f), "l-est", "l-sub", "match-rate"})
    rows.push_back({trial, method, "error=" + what, metric, nan, 0.0});
  return rows;
}

// -------------------------------------------------------------- offline

/// Per trial: generate train and test, tune each method on the validation
/// tail of the training set, refit on the full training set and score on
/// the test set. Every method sees the same data.
inline SweepResult run_offline_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const ProblemSpec problem = cfg.problem();
  struct TrialOut {
    std::vector<ResultRow> rows;
    bool failed = false;
  };
  auto trial_job = [&](std::size_t trial) -> TrialOut {
    TrialOut out;
    std::vector<SupervisedSample> train, test;
    try {
      InstanceGenerator gen(problem, cfg.seed, trial);
      train = gen.batch(0, cfg.T_train);
      test = gen.batch(cfg.T_train, cfg.T_test);
    } catch (const std::exception& e) {
      out.failed = true;
      for (const auto& m : cfg.methods) {
        auto rows = error_rows(trial, m.name(), e.what(), cfg.family);
        out.rows.insert(out.rows.end(), rows.begin(), rows.end());
      }
      return out;
    }
    const auto n_val = static_cast<std::size_t>(std::max(
        1.0, std::round(cfg.validation_fraction * static_cast<double>(cfg.T_train))));
    const SupervisedSpan all(train);
    const SupervisedSpan fit_part = all.first(cfg.T_train - n_val);
    const SupervisedSpan val_part = all.last(n_val);
    const std::uint64_t trial_seed = splitmix64(cfg.seed ^ (trial * 0x9e3779b97f4a7c15ULL));
    for (const auto& m : cfg.methods) {
      const auto start = std::chrono::steady_clock::now();
      try {
        const Hyperparams h = tune(m, candidates(m, cfg.grids, cfg.spo_lambda), fit_part,
                                   val_part, cfg, trial_seed, cfg.family);
        const FittedModel model = fit_method(m, h, all, cfg, trial_seed);
        const Evaluation ev = evaluate_model(cfg.family, test, model);
        const double ms =
            cfg.timings ? std::chrono::duration<double, std::milli>(
                              std::chrono::steady_clock::now() - start)
                              .count()
                        : 0.0;
        const std::string hp = describe(m, h);
        if (std::abs(ev.match_rate - (1.0 - static_cast<double>(ev.mistakes) /
                                                static_cast<double>(cfg.T_test))) > 1e-12)
          throw std::logic_error("match rate disagrees with the mistake count");
        out.rows.push_back({trial, m.name(), hp, relative_metric(cfg.family), ev.relative_loss, ms});
        out.rows.push_back({trial, m.name(), hp, "l-est", ev.estimate_loss, ms});
        out.rows.push_back({trial, m.name(), hp, "l-sub", ev.suboptimality, ms});
        out.rows.push_back({trial, m.name(), hp, "match-rate", ev.match_rate, ms});
      } catch (const std::exception& e) {
        out.failed = true;
        auto rows = error_rows(trial, m.name(), e.what(), cfg.family);
        out.rows.insert(out.rows.end(), rows.begin(), rows.end());
      }
    }
    return out;
  };
  const auto per_trial = run_indexed<TrialOut>(cfg.trials, cfg.workers, trial_job);
  SweepResult result;
  for (const auto& t : per_trial) {
    result.rows.insert(result.rows.end(), t.rows.begin(), t.rows.end());
    result.failed_trials += t.failed ? 1 : 0;
  }
  sort_rows(result.rows);
  return result;
}

// --------------------------------------------------------------- online

struct OnlineStream {
  std::vector<SupervisedSample> samples;
  double theta_bar = 0.0;
  double sigma_bar = 0.0;
  Family family = Family::Knapsack;
};

inline OnlineStream make_online_stream(const ExperimentConfig& cfg, std::size_t trial) {
  OnlineStream out;
  const std::uint64_t seed = splitmix64(cfg.seed ^ (trial * 0x9e3779b97f4a7c15ULL));
  if (cfg.online.separable) {
    SeparableSpec spec;
    spec.problem.knapsack.n_items = cfg.online.n_items;
    spec.problem.d = cfg.online.d;
    spec.min_raw_margin = cfg.online.min_raw_margin;
    spec.fixed_constraints = cfg.online.fixed_constraints;
    auto st = gen_separable_stream(spec, cfg.online.T, seed);
    out.samples = std::move(st.samples);
    out.theta_bar = st.theta_bar;
    out.sigma_bar = st.sigma_bar;
    out.family = Family::Knapsack;
    return out;
  }
  InstanceGenerator gen(cfg.problem(), cfg.seed, trial);
  out.samples = gen.batch(0, cfg.online.T);
  out.family = cfg.family;
  for (const auto& s : out.samples)
    out.sigma_bar = std::max(out.sigma_bar, basis_inverse_norm(s.sample));
  return out;
}

/// Streams each trial through every online method in the config and emits
/// cumulative regret and mistakes at evenly spaced checkpoints, plus the
/// match rate over the final fifth of the stream.
inline SweepResult run_online_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  struct TrialOut {
    std::vector<ResultRow> rows;
    bool failed = false;
  };
  auto trial_job = [&](std::size_t trial) -> TrialOut {
    TrialOut out;
    OnlineStream stream;
    try {
      stream = make_online_stream(cfg, trial);
    } catch (const std::exception& e) {
      out.failed = true;
      for (const auto& m : cfg.methods)
        out.rows.push_back({trial, m.name(), std::string("error=") + e.what(), "cum-regret",
                            std::numeric_limits<double>::quiet_NaN(), 0.0});
      return out;
    }
    const auto refs = refs_of(stream.samples);
    const std::size_t T = stream.samples.size();
    StepEvaluator eval = [&](std::size_t t, const Vector& x) {
      return relative_loss(stream.family, stream.samples[t], x);
    };
    for (const auto& m : cfg.methods) {
      if (!m.is_online()) continue;
      const auto start = std::chrono::steady_clock::now();
      try {
        OnlineRunConfig oc;
        oc.algorithm = online_algorithm(m.kind);
        oc.radius = stream.theta_bar;
        oc.eta = cfg.online.eta > 0.0
                     ? cfg.online.eta
                     : ogd_regret_step_size(std::max(stream.theta_bar, 1.0), stream.sigma_bar,
                                       refs.front()->n(), refs.front()->m(), T);
        if (m.kind == MethodKind::NaiveSuboptOgd) {
          oc.eta = cfg.online.naive_eta;
          oc.decay = StepDecay::InverseSqrt;
          oc.radius = 0.0;
        }
        oc.ftrl_max_epochs = cfg.mom_max_epochs;
        oc.ftrl_tol = cfg.mom_tol;
        const auto run = online_run(refs, oc, eval);
        const double ms =
            cfg.timings ? std::chrono::duration<double, std::milli>(
                              std::chrono::steady_clock::now() - start)
                              .count()
                        : 0.0;
        std::string hp = m.kind == MethodKind::MomPerceptron
                             ? std::string()
                             : "eta=" + format_double(oc.eta) + ";";
        if (oc.radius > 0.0) hp += "radius=" + format_double(oc.radius) + ";";
        const std::size_t parts = std::max<std::size_t>(1, std::min(cfg.online.checkpoints, T));
        for (std::size_t k = 1; k <= parts; ++k) {
          const std::size_t t = T * k / parts;
          const std::string at = hp + "t=" + std::to_string(t);
          out.rows.push_back({trial, m.name(), at, "cum-regret", run.cumulative_regret[t - 1], ms});
          out.rows.push_back({trial, m.name(), at, "mistakes",
                              static_cast<double>(run.cumulative_mistakes[t - 1]), ms});
        }
        out.rows.push_back({trial, m.name(), hp + "t=" + std::to_string(T), "match-rate",
                            run.match_rate(T - T / 5, T), ms});
      } catch (const std::exception& e) {
        out.failed = true;
        out.rows.push_back({trial, m.name(), std::string("error=") + e.what(), "cum-regret",
                            std::numeric_limits<double>::quiet_NaN(), 0.0});
      }
    }
    return out;
  };
  const auto per_trial = run_indexed<TrialOut>(cfg.trials, cfg.workers, trial_job);
  SweepResult result;
  for (const auto& t : per_trial) {
    result.rows.insert(result.rows.end(), t.rows.begin(), t.rows.end());
    result.failed_trials += t.failed ? 1 : 0;
  }
  sort_rows(result.rows);
  return result;
}

// ------------------------------------------------------------- summary

/// Values of one metric for one method, in trial order.
inline std::vector<double> metric_values(const std::vector<ResultRow>& rows,
                                         const std::string& method, const std::string& metric) {
  std::vector<double> out;
  for (const auto& r : rows)
    if (r.method == method && r.metric == metric) out.push_back(r.value);
  return out;
}

inline double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

}  // namespace mom
