#ifndef DPPSEARCH_SAMPLERS_HPP
#define DPPSEARCH_SAMPLERS_HPP

// Open-loop configuration generators: uniform, grid, Sobol (optionally
// Cranley-Patterson rotated), k-DPP Metropolis-Hastings over an index set or
// over an arbitrary search space, and sequential posterior-variance sampling.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "dppsearch/errors.hpp"
#include "dppsearch/kernel.hpp"
#include "dppsearch/parallel.hpp"
#include "dppsearch/rng.hpp"
#include "dppsearch/searchspace.hpp"
#include "dppsearch/sobol.hpp"

namespace dppsearch {

struct SampleSet {
  std::vector<Configuration> points;
  std::string sampler;
  std::uint64_t seed = 0;
  std::map<std::string, double> diagnostics;
};

struct McmcSettings {
  std::size_t steps = 5000;
  std::uint64_t seed = 0;

  /// max(10 k ln(k+1) * 50, 5000).
  static std::size_t default_steps(std::size_t k) {
    const double kd = static_cast<double>(k);
    return std::max<std::size_t>(
        static_cast<std::size_t>(std::ceil(10.0 * kd * std::log(kd + 1.0) * 50.0)), 5000);
  }
};

namespace detail {

inline void require_k(std::size_t k) {
  if (k == 0) throw InvalidArgument("k must be at least 1");
}

inline void require_hypercube(const SearchSpace& space, std::string_view method) {
  if (!space.is_hypercube())
    throw UnsupportedSpace(std::string(method) +
                           " is defined only on the [0,1]^d hypercube: the space must "
                           "consist of unconditional continuous/integer dimensions");
}

inline Configuration from_unit(const SearchSpace& space, const std::vector<double>& t) {
  Configuration c;
  const auto& dims = space.dimensions();
  for (std::size_t j = 0; j < dims.size(); ++j)
    c.values.emplace(dims[j].spec.name, decode_numeric(dims[j].spec, t[j]));
  return c;
}

}  // namespace detail

/// k independent uniform draws.
inline SampleSet uniform_sample(const SearchSpace& space, std::size_t k, std::uint64_t seed) {
  detail::require_k(k);
  Rng rng(seed);
  SampleSet out{{}, "uniform", seed, {}};
  out.points.reserve(k);
  for (std::size_t i = 0; i < k; ++i) out.points.push_back(sample_uniform(space, rng));
  return out;
}

/// First k points of the (m+1)^d lattice {0, 1/m, ..., 1}^d in lexicographic
/// order, with m the smallest value (at least 1) such that (m+1)^d >= k.
inline SampleSet grid_sample(const SearchSpace& space, std::size_t k) {
  detail::require_k(k);
  detail::require_hypercube(space, "grid search");
  const std::size_t d = space.dimensions().size();
  std::size_t m = 1;
  auto lattice_size = [d](std::size_t side) {
    double n = 1.0;
    for (std::size_t j = 0; j < d; ++j) n *= static_cast<double>(side);
    return n;
  };
  while (lattice_size(m + 1) < static_cast<double>(k)) ++m;

  SampleSet out{{}, "grid", 0, {{"m", static_cast<double>(m)}}};
  std::vector<std::size_t> idx(d, 0);
  std::vector<double> t(d);
  for (std::size_t n = 0; n < k; ++n) {
    for (std::size_t j = 0; j < d; ++j)
      t[j] = static_cast<double>(idx[j]) / static_cast<double>(m);
    out.points.push_back(detail::from_unit(space, t));
    for (std::size_t j = d; j-- > 0;) {  // odometer, last axis fastest
      if (++idx[j] <= m) break;
      idx[j] = 0;
    }
  }
  return out;
}

/// First k Sobol points; with `rotate`, shifted by a seed-derived uniform
/// vector modulo 1.
inline SampleSet sobol_sample(const SearchSpace& space, std::size_t k, bool rotate,
                              std::uint64_t seed) {
  detail::require_k(k);
  detail::require_hypercube(space, "the Sobol sequence");
  const std::size_t d = space.dimensions().size();
  SobolSequence sobol(d);
  std::vector<double> shift(d, 0.0);
  if (rotate) {
    Rng rng(derive_seed(seed, hash_name("sobol-shift")));
    for (auto& s : shift) s = rng.uniform();
  }
  SampleSet out{{}, rotate ? "sobol" : "sobol-unrotated", rotate ? seed : 0, {}};
  for (std::size_t n = 0; n < k; ++n)
    out.points.push_back(detail::from_unit(space, rotate ? dppsearch::rotate(sobol.point(n), shift)
                                                         : sobol.point(n)));
  return out;
}

/// Metropolis-Hastings swap chain for a k-DPP over an explicit N x N L.
/// Returns the final index set, sorted ascending.
inline std::vector<std::size_t> kdpp_mcmc_discrete(const Eigen::MatrixXd& L, std::size_t k,
                                                   const McmcSettings& settings,
                                                   double* acceptance_rate = nullptr) {
  const auto n = static_cast<std::size_t>(L.rows());
  if (L.rows() != L.cols()) throw InvalidArgument("L must be square");
  detail::require_k(k);
  if (k > n) throw InvalidArgument("k exceeds the number of items");
  if (settings.steps == 0) throw InvalidArgument("mcmc steps must be at least 1");
  Rng rng(settings.seed);

  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  for (std::size_t i = 0; i < k; ++i) std::swap(perm[i], perm[i + rng.index(n - i)]);
  std::vector<std::size_t> in(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(k));
  std::vector<std::size_t> out(perm.begin() + static_cast<std::ptrdiff_t>(k), perm.end());

  auto minor_logdet = [&](const std::vector<std::size_t>& idx) {
    const auto m = static_cast<Eigen::Index>(idx.size());
    Eigen::MatrixXd sub(m, m);
    for (Eigen::Index i = 0; i < m; ++i)
      for (Eigen::Index j = 0; j < m; ++j) sub(i, j) = L(idx[i], idx[j]);
    return logdet(sub);
  };

  std::size_t accepted = 0;
  if (!out.empty()) {
    double current = minor_logdet(in);
    std::vector<std::size_t> proposal = in;
    for (std::size_t step = 0; step < settings.steps; ++step) {
      const std::size_t a = rng.index(k);
      const std::size_t b = rng.index(out.size());
      proposal = in;
      proposal[a] = out[b];
      const double next = minor_logdet(proposal);
      if (rng.uniform() < acceptance_probability(current, next)) {
        std::swap(in[a], out[b]);
        current = next;
        ++accepted;
      }
    }
  }
  if (acceptance_rate)
    *acceptance_rate = static_cast<double>(accepted) / static_cast<double>(settings.steps);
  std::sort(in.begin(), in.end());
  return in;
}

/// Metropolis-Hastings k-DPP sampler over any space with a uniform sampler:
/// proposals replace a uniformly chosen member with a fresh uniform draw.
/// Kernel entries of the current set are cached, so each step computes only
/// the k entries involving the proposed point.
inline SampleSet kdpp_mcmc_mixed(const SearchSpace& space, std::size_t k,
                                 const KernelConfig& cfg, const McmcSettings& settings) {
  detail::require_k(k);
  cfg.validate();
  if (settings.steps == 0) throw InvalidArgument("mcmc steps must be at least 1");
  Rng rng(settings.seed);

  std::vector<Configuration> beta;
  std::vector<FeatureVector> phi;
  std::vector<double> q;
  for (std::size_t i = 0; i < k; ++i) {
    beta.push_back(sample_uniform(space, rng));
    phi.push_back(encode(space, beta.back()));
    q.push_back(quality(beta.back()));
  }
  Eigen::MatrixXd current = build_L(phi, q, cfg).entries();
  double current_logdet = logdet(current);

  Eigen::MatrixXd proposal;
  std::size_t accepted = 0;
  for (std::size_t step = 0; step < settings.steps; ++step) {
    const auto u = static_cast<Eigen::Index>(rng.index(k));
    Configuration v = sample_uniform(space, rng);
    FeatureVector phi_v = encode(space, v);
    const double q_v = quality(v);
    proposal = current;
    for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(k); ++j) {
      if (j == u) continue;
      const double e = q_v * q[j] * rbf(phi_v, phi[j], cfg);
      proposal(u, j) = e;
      proposal(j, u) = e;
    }
    proposal(u, u) = q_v * q_v + cfg.jitter;
    const double proposal_logdet = logdet(proposal);
    if (rng.uniform() < acceptance_probability(current_logdet, proposal_logdet)) {
      beta[u] = std::move(v);
      phi[u] = std::move(phi_v);
      q[u] = q_v;
      current.swap(proposal);
      current_logdet = proposal_logdet;
      ++accepted;
    }
  }
  SampleSet out{std::move(beta), "kdpp-mcmc", settings.seed, {}};
  out.diagnostics["mcmc_steps"] = static_cast<double>(settings.steps);
  out.diagnostics["acceptance_rate"] =
      static_cast<double>(accepted) / static_cast<double>(settings.steps);
  out.diagnostics["sigma"] = cfg.sigma;
  return out;
}

/// Picks an index with probability proportional to `weights` (one draw).
/// Throws DegenerateError if every weight is below kMinPivot.
inline std::size_t pick_proportional(std::span<const double> weights, Rng& rng) {
  double total = 0.0, largest = 0.0;
  for (double w : weights) {
    total += w;
    largest = std::max(largest, w);
  }
  if (!(largest >= kMinPivot))
    throw DegenerateError("candidate pool is degenerate: every posterior variance vanished");
  const double target = rng.uniform() * total;
  double cum = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    last_positive = i;
    cum += weights[i];
    if (target < cum) return i;
  }
  return last_positive;
}

/// Seed used for the i-th (0-based) point of a sequential sample.
inline std::uint64_t sequential_step_seed(std::uint64_t seed, std::size_t i) {
  return derive_seed(seed, static_cast<std::uint64_t>(i));
}

namespace detail {

// One sequential step: fresh uniform pool, variances evaluated in parallel,
// one candidate drawn proportional to its posterior variance.
inline Configuration sequential_step(const SearchSpace& space, const PosteriorVariance& state,
                                     std::size_t pool_size, Rng& rng, std::size_t threads,
                                     FeatureVector* chosen_phi) {
  std::vector<Configuration> pool;
  pool.reserve(pool_size);
  for (std::size_t i = 0; i < pool_size; ++i) pool.push_back(sample_uniform(space, rng));
  std::vector<FeatureVector> phi(pool_size);
  std::vector<double> var(pool_size);
  parallel_for(
      pool_size,
      [&](std::size_t i) {
        phi[i] = encode(space, pool[i]);
        var[i] = state.variance(phi[i], quality(pool[i]));
      },
      threads);
  const std::size_t pick = pick_proportional(var, rng);
  *chosen_phi = std::move(phi[pick]);
  return std::move(pool[pick]);
}

}  // namespace detail

/// Adds one point drawn proportional to the GP posterior variance given the
/// points already in `sample`; the existing points are kept in order.
inline SampleSet extend_sample(const SearchSpace& space, const SampleSet& sample,
                               const KernelConfig& cfg, std::size_t pool_size,
                               std::uint64_t seed, std::size_t threads = 0) {
  if (pool_size == 0) throw InvalidArgument("pool size must be at least 1");
  PosteriorVariance state(cfg);
  for (const auto& p : sample.points) state.add(encode(space, p), quality(p));
  Rng rng(seed);
  FeatureVector phi;
  SampleSet out = sample;
  out.points.push_back(detail::sequential_step(space, state, pool_size, rng, threads, &phi));
  return out;
}

/// k points drawn one at a time proportional to the posterior variance; the
/// i-th point uses the seed sequential_step_seed(seed, i).
inline SampleSet kdpp_sequential(const SearchSpace& space, std::size_t k,
                                 const KernelConfig& cfg, std::size_t pool_size,
                                 std::uint64_t seed, std::size_t threads = 0) {
  detail::require_k(k);
  if (pool_size == 0) throw InvalidArgument("pool size must be at least 1");
  PosteriorVariance state(cfg);
  SampleSet out{{}, "kdpp-seq", seed, {}};
  for (std::size_t i = 0; i < k; ++i) {
    Rng rng(sequential_step_seed(seed, i));
    FeatureVector phi;
    out.points.push_back(detail::sequential_step(space, state, pool_size, rng, threads, &phi));
    state.add(phi, quality(out.points.back()));
  }
  out.diagnostics["pool_size"] = static_cast<double>(pool_size);
  out.diagnostics["sigma"] = cfg.sigma;
  return out;
}

/// Sequential posterior-variance selection of k items from a fixed finite
/// pool of feature vectors (qualities 1). Returns indices in selection order.
inline std::vector<std::size_t> kdpp_sequential_pool(std::span<const FeatureVector> pool,
                                                     std::size_t k, const KernelConfig& cfg,
                                                     std::uint64_t seed) {
  detail::require_k(k);
  if (k > pool.size()) throw InvalidArgument("k exceeds the pool size");
  PosteriorVariance state(cfg);
  std::vector<std::size_t> chosen;
  std::vector<double> var(pool.size());
  for (std::size_t i = 0; i < k; ++i) {
    Rng rng(sequential_step_seed(seed, i));
    for (std::size_t c = 0; c < pool.size(); ++c) var[c] = state.variance(pool[c]);
    for (std::size_t c : chosen) var[c] = 0.0;
    const std::size_t pick = pick_proportional(var, rng);
    chosen.push_back(pick);
    state.add(pool[pick]);
  }
  return chosen;
}

// ---------------------------------------------------------------------------
// Name-based dispatch shared by the CLI and the benchmark harness.

inline constexpr std::array<std::string_view, 6> kSamplerNames = {
    "uniform", "grid", "sobol", "sobol-unrotated", "kdpp-mcmc", "kdpp-seq"};

inline bool is_sampler_name(std::string_view name) {
  return std::find(kSamplerNames.begin(), kSamplerNames.end(), name) != kSamplerNames.end();
}

inline std::string sampler_name_list() {
  std::string s;
  for (auto n : kSamplerNames) {
    if (!s.empty()) s += ", ";
    s += n;
  }
  return s;
}

struct SamplerOptions {
  std::uint64_t seed = 0;
  std::optional<double> sigma;        // default sqrt(2)/k
  std::optional<std::size_t> steps;   // default McmcSettings::default_steps(k)
  std::size_t pool = 1000;
  bool rotate = true;                 // Sobol only
  double jitter = 1e-10;
  std::size_t threads = 0;            // 0 = default_threads()

  KernelConfig kernel(std::size_t k) const {
    return {sigma ? *sigma : KernelConfig::for_budget(k).sigma, jitter};
  }
};

/// Draws k configurations with the named method. "sobol" honours
/// options.rotate; "sobol-unrotated" never rotates.
inline SampleSet draw(std::string_view method, const SearchSpace& space, std::size_t k,
                      const SamplerOptions& options) {
  detail::require_k(k);
  if (method == "uniform") return uniform_sample(space, k, options.seed);
  if (method == "grid") return grid_sample(space, k);
  if (method == "sobol") return sobol_sample(space, k, options.rotate, options.seed);
  if (method == "sobol-unrotated") return sobol_sample(space, k, false, options.seed);
  if (method == "kdpp-mcmc")
    return kdpp_mcmc_mixed(space, k, options.kernel(k),
                           {options.steps ? *options.steps : McmcSettings::default_steps(k),
                            options.seed});
  if (method == "kdpp-seq")
    return kdpp_sequential(space, k, options.kernel(k), options.pool, options.seed,
                           options.threads);
  throw InvalidArgument("unknown sampler '" + std::string(method) +
                        "' (valid: " + sampler_name_list() + ")");
}

}  // namespace dppsearch

#endif  // DPPSEARCH_SAMPLERS_HPP
