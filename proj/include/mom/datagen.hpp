#pragma once

// Benchmark LP families and their synthetic data distributions:
// shortest path on a k x k grid of east/north edges and the fractional
// knapsack in standard form, with polynomial cost maps and three kinds of
// noise (multiplicative, covariate-dependent scale, additive).

#include <cmath>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "mom/common.hpp"
#include "mom/lp_core.hpp"
#include "mom/margin.hpp"
#include "mom/rng.hpp"

namespace mom {

/// A training sample together with the cost vector that generated it.
/// `consistent` records whether solving with c reproduces x_star.
struct SupervisedSample {
  TrainingSample sample;
  Vector c;
  bool consistent = true;
};

enum class Family { ShortestPath, Knapsack };

inline const char* to_string(Family f) {
  return f == Family::ShortestPath ? "sp" : "fk";
}

inline Family parse_family(const std::string& s) {
  if (s == "sp") return Family::ShortestPath;
  if (s == "fk") return Family::Knapsack;
  throw std::invalid_argument("unknown problem family '" + s + "'");
}

struct GridSpec {
  Index k = 5;
  Index edges() const { return 2 * k * (k - 1); }
  Index nodes() const { return k * k; }
};

enum class PriceMode { Integer1To1000, Uniform01 };

struct KnapsackSpec {
  Index n_items = 10;
  PriceMode price_mode = PriceMode::Integer1To1000;
  /// Divide the budget row by max(1, B) so every variable is bounded by 1.
  bool scale_budget_row = false;
  Index variables() const { return 2 * n_items + 1; }
  Index constraints() const { return n_items + 1; }
};

struct NoiseSpec {
  int deg = 1;
  double eps_bar = 0.0;
  double alpha_bar = 0.0;
  double eta_bar = 0.0;

  void validate() const {
    if (deg < 1) throw std::invalid_argument("deg must be >= 1");
    if (!(eps_bar >= 0.0 && eps_bar < 1.0))
      throw std::invalid_argument("eps_bar must lie in [0, 1)");
    if (!(alpha_bar >= 0.0)) throw std::invalid_argument("alpha_bar must be >= 0");
    if (!(eta_bar >= 0.0)) throw std::invalid_argument("eta_bar must be >= 0");
  }
};

// ---------------------------------------------------------------- grid

inline Index grid_east_edge(Index k, Index row, Index col) { return row * (k - 1) + col; }
inline Index grid_north_edge(Index k, Index row, Index col) {
  return k * (k - 1) + row * k + col;
}

/// Node-arc incidence over all k^2 nodes (+1 at the tail, -1 at the head).
/// Node id = row * k + col with row 0 at the south edge.
inline Matrix grid_incidence(const GridSpec& spec) {
  const Index k = spec.k;
  require_dims(k >= 2, "grid side must be >= 2");
  Matrix M = Matrix::Zero(spec.nodes(), spec.edges());
  for (Index row = 0; row < k; ++row) {
    for (Index col = 0; col + 1 < k; ++col) {
      const Index e = grid_east_edge(k, row, col);
      M(row * k + col, e) = 1.0;
      M(row * k + col + 1, e) = -1.0;
    }
  }
  for (Index row = 0; row + 1 < k; ++row) {
    for (Index col = 0; col < k; ++col) {
      const Index e = grid_north_edge(k, row, col);
      M(row * k + col, e) = 1.0;
      M((row + 1) * k + col, e) = -1.0;
    }
  }
  return M;
}

/// Unit flow from the south-west to the north-east corner. The north-east
/// balance row is dropped, leaving k^2 - 1 independent rows.
inline StandardFormLP build_grid_lp(const GridSpec& spec, const Vector& c) {
  require_dims(c.size() == spec.edges(), "grid cost length must be 2k(k-1)");
  const Matrix full = grid_incidence(spec);
  StandardFormLP lp;
  lp.A = full.topRows(spec.nodes() - 1);
  lp.b = Vector::Zero(spec.nodes() - 1);
  lp.b(0) = 1.0;
  lp.c = c;
  return lp;
}

// ------------------------------------------------------------ knapsack

/// min c'x  s.t.  p'x + s1 = B,  x + s2 = 1,  x, s1, s2 >= 0, with variables
/// ordered (x, s1, s2) and zero cost on the slacks.
inline StandardFormLP build_knapsack_lp(const Vector& prices, double budget,
                                        const Vector& c) {
  const Index n = prices.size();
  require_dims(n >= 1, "knapsack needs at least one item");
  require_dims(c.size() == n || c.size() == 2 * n + 1,
               "knapsack cost must cover the items or all variables");
  if (!(prices.minCoeff() > 0.0)) throw std::invalid_argument("prices must be positive");
  if (!(budget > 0.0)) throw std::invalid_argument("budget must be positive");
  StandardFormLP lp;
  lp.A = Matrix::Zero(n + 1, 2 * n + 1);
  lp.A.row(0).head(n) = prices.transpose();
  lp.A(0, n) = 1.0;
  lp.A.bottomLeftCorner(n, n).setIdentity();
  lp.A.bottomRightCorner(n, n).setIdentity();
  lp.b = Vector::Ones(n + 1);
  lp.b(0) = budget;
  lp.c = Vector::Zero(2 * n + 1);
  lp.c.head(c.size()) = c;
  return lp;
}

/// B ~ Unif[low, high] with low = max p and high = sum p - u * low, u ~ U[0,1].
/// An empty interval (high < low) collapses to B = low.
inline double gen_budget(const Vector& prices, Rng& rng) {
  require_dims(prices.size() >= 1, "prices must be nonempty");
  const double low = prices.maxCoeff();
  const double u = rng.uniform();
  const double high = std::max(prices.sum() - u * low, low);
  return rng.uniform(low, high);
}

inline Vector gen_prices(const KnapsackSpec& spec, Rng& rng) {
  Vector p(spec.n_items);
  for (Index j = 0; j < spec.n_items; ++j) {
    if (spec.price_mode == PriceMode::Integer1To1000) {
      p(j) = static_cast<double>(rng.uniform_int(1, 1000));
    } else {
      double v = rng.uniform();
      while (v <= 0.0) v = rng.uniform();
      p(j) = v;
    }
  }
  return p;
}

// -------------------------------------------------------- distributions

inline Matrix gen_ground_truth(Index n, Index d, Rng& rng) {
  Matrix V(n, d);
  for (Index j = 0; j < d; ++j)
    for (Index i = 0; i < n; ++i) V(i, j) = rng.bernoulli(0.5) ? 1.0 : 0.0;
  return V;
}

/// Draws (eps_j, eta_j) for every j and the scale alpha. Noise draws happen
/// even when the corresponding level is zero so that streams stay aligned
/// across noise settings.
struct NoiseDraw {
  Vector eps;
  Vector eta;
  double alpha = 1.0;
};

inline NoiseDraw draw_noise(const NoiseSpec& noise, Index n, double z_first, Rng& rng) {
  NoiseDraw out;
  out.eps.resize(n);
  out.eta.resize(n);
  for (Index j = 0; j < n; ++j) {
    out.eps(j) = rng.uniform(1.0 - noise.eps_bar, 1.0 + noise.eps_bar);
    out.eta(j) = 0.5 * (rng.exponential(1.0) - 1.0);
  }
  out.alpha = z_first > 0.5 ? 1.0 + noise.alpha_bar : 1.0;
  return out;
}

/// z = (g_1, ..., g_{d-1}, 1) with standard normal g.
inline Vector gen_gaussian_covariates(Index d, Rng& rng) {
  Vector z(d);
  for (Index k = 0; k + 1 < d; ++k) z(k) = rng.normal();
  z(d - 1) = 1.0;
  return z;
}

/// z = (u_1, ..., u_{d-1}, 1) with u ~ U[0,1].
inline Vector gen_uniform_covariates(Index d, Rng& rng) {
  Vector z(d);
  for (Index k = 0; k + 1 < d; ++k) z(k) = rng.uniform();
  z(d - 1) = 1.0;
  return z;
}

/// c_j = [((Vz)_j / sqrt(d) + 3)^deg + 1] eps_j alpha + eta_bar eta_j.
inline Vector sp_costs(const Matrix& V, const Vector& z, const NoiseSpec& noise,
                       const NoiseDraw& draw) {
  const Vector lin = V * z / std::sqrt(static_cast<double>(z.size()));
  Vector c(V.rows());
  for (Index j = 0; j < c.size(); ++j)
    c(j) = (std::pow(lin(j) + 3.0, noise.deg) + 1.0) * draw.eps(j) * draw.alpha +
           noise.eta_bar * draw.eta(j);
  return c;
}

/// u_j = (Vz)_j^deg eps_j alpha + eta_bar eta_j (item utilities).
inline Vector fk_utilities(const Matrix& V, const Vector& z, const NoiseSpec& noise,
                           const NoiseDraw& draw) {
  const Vector lin = V * z;
  Vector u(V.rows());
  for (Index j = 0; j < u.size(); ++j)
    u(j) = std::pow(lin(j), noise.deg) * draw.eps(j) * draw.alpha +
           noise.eta_bar * draw.eta(j);
  return u;
}

/// Outcome of one generation attempt; nullopt means "draw again".
using MaybeSample = std::optional<SupervisedSample>;

namespace detail {

// Smallest nonbasic reduced cost of c at the basis; positive iff the
// optimum is unique.
inline double min_nonbasic_reduced_cost(const Vector& c, const TrainingSample& s) {
  const Vector r = nonbasic_reduced_costs(s, c);
  return r.size() ? r.minCoeff() : std::numeric_limits<double>::infinity();
}

// Shortest-path optima are always degenerate (a path uses 2(k-1) of the
// k^2-1 basic slots), so the basis is taken from the perturbed solve.
inline MaybeSample sample_from_costs(const StandardFormLP& lp, Vector z,
                                     bool allow_degenerate) {
  SolverOptions opts;
  opts.perturb = allow_degenerate;
  const LPResult res = solve_lp(lp, opts);
  if (!res.ok()) return std::nullopt;
  const LPSolution& sol = res.get();
  SupervisedSample out{make_training_sample(sol.x, lp.A, lp.b, std::move(z), sol.basis),
                       lp.c, true};
  if (!(detail::min_nonbasic_reduced_cost(lp.c, out.sample) > 1e-9)) return std::nullopt;
  return out;
}

}  // namespace detail

/// One shortest-path draw; nullopt when the instance must be re-drawn.
inline MaybeSample gen_sp_instance(const Matrix& V, const GridSpec& grid,
                                   const NoiseSpec& noise, Rng& rng,
                                   bool normalize_covariates = false) {
  require_dims(V.rows() == grid.edges(), "V rows must equal the edge count");
  Vector z = gen_gaussian_covariates(V.cols(), rng);
  const NoiseDraw draw = draw_noise(noise, V.rows(), z(0), rng);
  const Vector c = sp_costs(V, z, noise, draw);
  if (normalize_covariates) z /= std::max(1.0, z.norm());
  return detail::sample_from_costs(build_grid_lp(grid, c), std::move(z), true);
}

/// One knapsack draw. In covariate-normalised mode z is divided by sqrt(d)
/// before the utilities are formed, so costs stay linear in the stored z.
inline MaybeSample gen_fk_instance(const Matrix& V, const KnapsackSpec& spec,
                                   const NoiseSpec& noise, Rng& rng,
                                   bool normalize_covariates = false) {
  require_dims(V.rows() == spec.n_items, "V rows must equal the item count");
  Vector z = gen_uniform_covariates(V.cols(), rng);
  const NoiseDraw draw = draw_noise(noise, V.rows(), z(0), rng);
  if (normalize_covariates) z /= std::sqrt(static_cast<double>(z.size()));
  const Vector u = fk_utilities(V, z, noise, draw);
  Vector prices = gen_prices(spec, rng);
  double budget = gen_budget(prices, rng);
  if (spec.scale_budget_row && budget > 1.0) {
    prices /= budget;
    budget = 1.0;
  }
  return detail::sample_from_costs(build_knapsack_lp(prices, budget, -u), std::move(z),
                                   false);
}

// ------------------------------------------------------------ generator

struct ProblemSpec {
  Family family = Family::ShortestPath;
  GridSpec grid;
  KnapsackSpec knapsack;
  NoiseSpec noise;
  Index d = 6;
  bool normalize_covariates = false;

  Index lp_variables() const {
    return family == Family::ShortestPath ? grid.edges() : knapsack.variables();
  }
  Index cost_rows() const {
    return family == Family::ShortestPath ? grid.edges() : knapsack.n_items;
  }

  /// Offline-experiment defaults per family.
  static ProblemSpec sp_default(int deg = 1) {
    ProblemSpec s;
    s.family = Family::ShortestPath;
    s.noise.deg = deg;
    s.d = 6;
    return s;
  }
  static ProblemSpec fk_default(int deg = 1) {
    ProblemSpec s;
    s.family = Family::Knapsack;
    s.noise.deg = deg;
    s.d = 5;
    return s;
  }
  /// Knapsack with every (A, b) entry in [0, 1], variables bounded by 1 and
  /// |z| <= 1.
  static ProblemSpec fk_normalized(int deg = 1) {
    ProblemSpec s = fk_default(deg);
    s.knapsack.price_mode = PriceMode::Uniform01;
    s.knapsack.scale_budget_row = true;
    s.normalize_covariates = true;
    return s;
  }
};

/// Thrown when an instance cannot be drawn within the attempt cap.
class GenerationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

constexpr int kMaxDrawAttempts = 100;

enum : std::uint64_t { kTruthStream = 1, kInstanceStream = 2, kSplitStream = 3 };

/// Deterministic source of instances for one trial: V is drawn once and
/// instance i depends only on (seed, trial, i).
class InstanceGenerator {
 public:
  InstanceGenerator(const ProblemSpec& spec, std::uint64_t seed, std::uint64_t trial = 0)
      : spec_(spec), seed_(seed), trial_(trial) {
    spec_.noise.validate();
    require_dims(spec_.d >= 1, "covariate dimension must be >= 1");
    Rng rng = Rng::stream(seed, kTruthStream, trial);
    V_ = gen_ground_truth(spec_.cost_rows(), spec_.d, rng);
  }

  const ProblemSpec& spec() const { return spec_; }
  const Matrix& ground_truth() const { return V_; }
  std::size_t redraws() const { return redraws_; }

  SupervisedSample instance(std::uint64_t index) {
    Rng rng = Rng::stream(seed_, kInstanceStream | (trial_ << 8), index);
    for (int attempt = 0; attempt < kMaxDrawAttempts; ++attempt) {
      MaybeSample s = spec_.family == Family::ShortestPath
                          ? gen_sp_instance(V_, spec_.grid, spec_.noise, rng,
                                            spec_.normalize_covariates)
                          : gen_fk_instance(V_, spec_.knapsack, spec_.noise, rng,
                                            spec_.normalize_covariates);
      if (s) return std::move(*s);
      ++redraws_;
    }
    throw GenerationError("no valid instance after " + std::to_string(kMaxDrawAttempts) +
                          " attempts");
  }

  std::vector<SupervisedSample> batch(std::uint64_t first, std::size_t count) {
    std::vector<SupervisedSample> out;
    out.reserve(count);
    for (std::size_t k = 0; k < count; ++k) out.push_back(instance(first + k));
    return out;
  }

 private:
  ProblemSpec spec_;
  std::uint64_t seed_;
  std::uint64_t trial_;
  Matrix V_;
  std::size_t redraws_ = 0;
};

// ------------------------------------------------------ separable streams

struct SeparableSpec {
  ProblemSpec problem = ProblemSpec::fk_normalized();
  double margin_scale = 1.0;
  /// Draws whose nonbasic reduced costs under the unscaled map fall below
  /// this are rejected, so the margin holds for every sample of the stream.
  double min_raw_margin = 0.05;
  /// Draw knapsack prices and budget once for the whole stream.
  bool fixed_constraints = false;
};

struct SeparableStream {
  std::vector<SupervisedSample> samples;
  Matrix theta_star;        ///< scaled so every margin is >= margin_scale
  double theta_bar = 0.0;   ///< |theta_star|_F
  double sigma_bar = 0.0;   ///< max over samples of sigma_max(A_B^{-1})
  double margin = 0.0;      ///< smallest nonbasic reduced cost under theta_star
  std::size_t rejected = 0;
};

/// The unscaled linear map behind a separable stream: for the knapsack the
/// item rows are -V and the slack rows are zero; for shortest path it is V.
inline Matrix separable_base_map(const ProblemSpec& spec, const Matrix& V) {
  if (spec.family == Family::ShortestPath) return V;
  Matrix theta = Matrix::Zero(spec.knapsack.variables(), V.cols());
  theta.topRows(V.rows()) = -V;
  return theta;
}

/// Stream with c = theta_star z exactly. The scale of theta_star is fixed up
/// front (margin_scale / min_raw_margin), so extending the stream never
/// changes earlier samples.
inline SeparableStream gen_separable_stream(const SeparableSpec& spec, std::size_t T,
                                            std::uint64_t seed) {
  if (!(spec.margin_scale > 0.0)) throw std::invalid_argument("margin_scale must be > 0");
  if (!(spec.min_raw_margin > 0.0)) throw std::invalid_argument("min_raw_margin must be > 0");
  const ProblemSpec& p = spec.problem;
  Rng truth_rng = Rng::stream(seed, kTruthStream, 0);
  const Matrix V = gen_ground_truth(p.cost_rows(), p.d, truth_rng);
  const double scale = spec.margin_scale / spec.min_raw_margin;
  SeparableStream out;
  out.theta_star = scale * separable_base_map(p, V);
  out.theta_bar = out.theta_star.norm();
  out.margin = std::numeric_limits<double>::infinity();

  auto draw_constraints = [&](Rng& rng) {
    Vector prices = gen_prices(p.knapsack, rng);
    double budget = gen_budget(prices, rng);
    if (p.knapsack.scale_budget_row && budget > 1.0) {
      prices /= budget;
      budget = 1.0;
    }
    return std::pair<Vector, double>(std::move(prices), budget);
  };
  const bool shared = p.family == Family::Knapsack && spec.fixed_constraints;
  Vector shared_prices;
  double shared_budget = 0.0;
  std::uint64_t constraint_draw = 0;
  auto next_constraints = [&] {
    if (constraint_draw == kMaxDrawAttempts)
      throw GenerationError("no constraint draw admits the requested margin");
    Rng rng = Rng::stream(seed, kSplitStream, constraint_draw++);
    std::tie(shared_prices, shared_budget) = draw_constraints(rng);
    out.samples.clear();
    out.margin = std::numeric_limits<double>::infinity();
    out.sigma_bar = 0.0;
  };
  if (shared) next_constraints();

  std::uint64_t index = 0;
  while (out.samples.size() < T) {
    if (out.rejected > 1000 * (out.samples.size() + 1)) {
      if (!shared) throw GenerationError("separable stream rejects nearly every draw");
      next_constraints();
      index = 0;
      out.rejected = 0;
    }
    Rng rng = Rng::stream(seed, kInstanceStream, index++);
    Vector z = p.family == Family::ShortestPath ? gen_gaussian_covariates(p.d, rng)
                                                : gen_uniform_covariates(p.d, rng);
    if (p.family == Family::ShortestPath) {
      z /= std::max(1.0, z.norm());
    } else {
      z /= std::sqrt(static_cast<double>(z.size()));
    }
    const Vector c = out.theta_star * z;
    StandardFormLP lp;
    if (p.family == Family::ShortestPath) {
      lp = build_grid_lp(p.grid, c);
    } else if (spec.fixed_constraints) {
      lp = build_knapsack_lp(shared_prices, shared_budget, c);
    } else {
      auto [prices, budget] = draw_constraints(rng);
      lp = build_knapsack_lp(prices, budget, c);
    }
    MaybeSample s = detail::sample_from_costs(lp, z, p.family == Family::ShortestPath);
    if (!s) {
      ++out.rejected;
      continue;
    }
    const double margin = detail::min_nonbasic_reduced_cost(c, s->sample);
    if (margin < spec.margin_scale) {
      ++out.rejected;
      continue;
    }
    out.margin = std::min(out.margin, margin);
    out.sigma_bar = std::max(out.sigma_bar, basis_inverse_norm(s->sample));
    out.samples.push_back(std::move(*s));
  }
  return out;
}

inline std::vector<TrainingSample> training_view(const std::vector<SupervisedSample>& data) {
  std::vector<TrainingSample> out;
  out.reserve(data.size());
  for (const auto& s : data) out.push_back(s.sample);
  return out;
}

inline SampleRefs training_refs(const std::vector<SupervisedSample>& data) {
  SampleRefs refs;
  refs.reserve(data.size());
  for (const auto& s : data) refs.push_back(&s.sample);
  return refs;
}

}  // namespace mom
