#ifndef DPPSEARCH_HARNESS_HPP
#define DPPSEARCH_HARNESS_HPP

// Benchmark harness: spread metrics versus k, distance to the centre and the
// origin, and best-found curves on a synthetic tree-structured tuning task.
// Every trial is a pure function of (master_seed, sampler, k, trial).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "dppsearch/errors.hpp"
#include "dppsearch/metrics.hpp"
#include "dppsearch/parallel.hpp"
#include "dppsearch/rng.hpp"
#include "dppsearch/samplers.hpp"
#include "dppsearch/searchspace.hpp"

namespace dppsearch {

struct BenchmarkConfig {
  std::string benchmark = "spread";  // spread | distance | optimization
  std::vector<std::string> samplers;
  std::size_t d = 1;
  std::vector<std::size_t> k_values;
  std::size_t trials = 50;
  std::uint64_t master_seed = 0;
  std::optional<std::string> objective;  // optimization only: hard | medium | easy
  std::optional<double> sigma;
  std::optional<std::size_t> steps;
  std::size_t pool = 1000;
  std::size_t threads = 0;

  void validate() const {
    if (benchmark != "spread" && benchmark != "distance" && benchmark != "optimization")
      throw InvalidArgument("unknown benchmark '" + benchmark +
                            "' (valid: spread, distance, optimization)");
    if (samplers.empty()) throw InvalidArgument("no samplers given");
    for (const auto& s : samplers)
      if (!is_sampler_name(s))
        throw InvalidArgument("unknown sampler '" + s + "' (valid: " + sampler_name_list() + ")");
    if (k_values.empty()) throw InvalidArgument("no k_values given");
    if (!std::is_sorted(k_values.begin(), k_values.end()))
      throw InvalidArgument("k_values must be sorted ascending");
    if (k_values.front() == 0) throw InvalidArgument("k_values must be positive");
    if (trials == 0) throw InvalidArgument("trials must be at least 1");
    if (benchmark != "optimization" && d == 0) throw InvalidArgument("d must be at least 1");
    if (benchmark == "optimization") {
      if (!objective) throw InvalidArgument("optimization benchmark needs an 'objective'");
      if (*objective != "hard" && *objective != "medium" && *objective != "easy")
        throw InvalidArgument("unknown objective '" + *objective +
                              "' (valid: hard, medium, easy)");
    }
    if (pool == 0) throw InvalidArgument("pool must be at least 1");
    if (steps && *steps == 0) throw InvalidArgument("steps must be at least 1");
  }
};

inline BenchmarkConfig parse_benchmark_config(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidArgument(std::string("benchmark config: ") + e.what());
  }
  if (!j.is_object()) throw InvalidArgument("benchmark config must be a JSON object");
  static const std::vector<std::string> keys = {
      "benchmark", "samplers", "d",     "k_values", "trials", "master_seed",
      "objective", "sigma",    "steps", "pool",     "threads"};
  for (const auto& [key, _] : j.items())
    if (std::find(keys.begin(), keys.end(), key) == keys.end())
      throw InvalidArgument("benchmark config: unknown key '" + key + "'");
  BenchmarkConfig c;
  try {
    if (j.contains("benchmark")) c.benchmark = j["benchmark"].get<std::string>();
    c.samplers = j.at("samplers").get<std::vector<std::string>>();
    if (j.contains("d")) c.d = j["d"].get<std::size_t>();
    c.k_values = j.at("k_values").get<std::vector<std::size_t>>();
    if (j.contains("trials")) c.trials = j["trials"].get<std::size_t>();
    if (j.contains("master_seed")) c.master_seed = j["master_seed"].get<std::uint64_t>();
    if (j.contains("objective")) c.objective = j["objective"].get<std::string>();
    if (j.contains("sigma")) c.sigma = j["sigma"].get<double>();
    if (j.contains("steps")) c.steps = j["steps"].get<std::size_t>();
    if (j.contains("pool")) c.pool = j["pool"].get<std::size_t>();
    if (j.contains("threads")) c.threads = j["threads"].get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("benchmark config: ") + e.what());
  }
  c.validate();
  return c;
}

struct TrialResult {
  std::string sampler;
  std::size_t k = 0;
  std::size_t trial = 0;
  std::vector<std::pair<std::string, double>> metrics;  // emission order
  std::vector<double> best_found;                        // optimization only
  double wall_time = 0.0;                                // seconds; not serialized

  double metric(std::string_view name) const {
    for (const auto& [n, v] : metrics)
      if (n == name) return v;
    throw InvalidArgument("trial has no metric '" + std::string(name) + "'");
  }
};

inline std::uint64_t trial_seed(std::uint64_t master, std::string_view sampler, std::size_t k,
                                std::size_t trial) {
  return derive_seed(master, {hash_name(sampler), static_cast<std::uint64_t>(k),
                              static_cast<std::uint64_t>(trial)});
}

inline PointSet to_point_set(const SearchSpace& space, const SampleSet& s) {
  std::vector<std::vector<double>> pts;
  pts.reserve(s.points.size());
  for (const auto& c : s.points) pts.push_back(unit_coordinates(space, c));
  return PointSet(std::move(pts));
}

// ---------------------------------------------------------------------------
// Synthetic tree-structured tuning task

/// Three continuous hyperparameters (learning rate, dropout, L2 strength) and a
/// boolean that switches L2 regularization on; the learning-rate range depends
/// on the regime.
inline SearchSpace synthetic_space(std::string_view regime) {
  DimensionSpec lr{"learning_rate", DimensionKind::continuous, 0, 0, Scale::log, {}, {}};
  if (regime == "hard") {
    lr.lo = std::exp(-5.0);
    lr.hi = std::exp(5.0);
  } else if (regime == "medium") {
    lr.lo = std::exp(-5.0);
    lr.hi = std::exp(-1.0);
  } else if (regime == "easy") {
    lr.lo = std::exp(-10.0);
    lr.hi = std::exp(-3.0);
  } else {
    throw InvalidArgument("unknown objective '" + std::string(regime) + "'");
  }
  DimensionSpec dropout{"dropout", DimensionKind::continuous, 0.0, 0.7, Scale::linear, {}, {}};
  DimensionSpec strength{"l2_strength",     DimensionKind::continuous, std::exp(-5.0),
                         std::exp(-1.0),    Scale::log,                {}, {}};
  DimensionSpec use_l2{"use_l2", DimensionKind::boolean, 0, 0, Scale::linear, {}, {}};
  use_l2.children.push_back({Value{true}, strength});
  return SearchSpace({lr, dropout, use_l2});
}

/// f(z) = max(0.5, 1 - L ||z - z*||) on z = (rescaled learning rate, rescaled
/// dropout) in [0,1]^2. The value 0.5 plays the role of chance accuracy; the
/// bump is confined to the leading `live_fraction` of the learning-rate axis.
struct SyntheticObjective {
  double live_fraction = 1.0;
  double lipschitz = 0.1;
  std::vector<double> optimum;  // z*

  static constexpr double kChance = 0.5;
  static constexpr double kPeak = 1.0;

  static SyntheticObjective make(std::string_view regime, std::uint64_t seed) {
    SyntheticObjective f;
    Rng rng(seed);
    if (regime == "easy") {
      f.live_fraction = 1.0;
      f.lipschitz = 0.1;  // f > chance on the whole square
      f.optimum = {rng.uniform(), rng.uniform()};
      return f;
    }
    f.live_fraction = regime == "hard" ? 0.1 : 0.5;
    f.lipschitz = (kPeak - kChance) / (f.live_fraction / 2.0);
    f.optimum = {f.live_fraction / 2.0, rng.uniform()};
    return f;
  }

  double operator()(const std::vector<double>& z) const {
    return std::max(kChance, kPeak - lipschitz * std::sqrt(squared_distance(z, optimum)));
  }
};

inline std::vector<double> synthetic_projection(const SearchSpace& space, const Configuration& c) {
  const FeatureVector phi = encode(space, c);
  const auto& dims = space.dimensions();
  return {phi[static_cast<Eigen::Index>(dims[space.index_of("learning_rate")].offset)],
          phi[static_cast<Eigen::Index>(dims[space.index_of("dropout")].offset)]};
}

// ---------------------------------------------------------------------------

namespace detail {

struct Job {
  std::string sampler;
  std::size_t k;
  std::size_t trial;
};

inline std::vector<Job> jobs_for(const BenchmarkConfig& cfg) {
  std::vector<Job> jobs;
  for (const auto& s : cfg.samplers)
    for (std::size_t k : cfg.k_values)
      for (std::size_t t = 0; t < cfg.trials; ++t) jobs.push_back({s, k, t});
  return jobs;
}

inline SamplerOptions options_for(const BenchmarkConfig& cfg, const Job& job) {
  SamplerOptions o;
  o.seed = trial_seed(cfg.master_seed, job.sampler, job.k, job.trial);
  o.sigma = cfg.sigma;
  o.steps = cfg.steps;
  o.pool = cfg.pool;
  o.rotate = true;
  o.threads = 1;  // parallelism is across trials
  return o;
}

template <typename TrialFn>
std::vector<TrialResult> run_jobs(const BenchmarkConfig& cfg, TrialFn&& fn) {
  cfg.validate();
  const auto jobs = jobs_for(cfg);
  std::vector<TrialResult> out(jobs.size());
  parallel_for(
      jobs.size(),
      [&](std::size_t i) {
        const auto start = std::chrono::steady_clock::now();
        TrialResult r{jobs[i].sampler, jobs[i].k, jobs[i].trial, {}, {}, 0.0};
        fn(jobs[i], r);
        r.wall_time =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        out[i] = std::move(r);
      },
      cfg.threads);
  return out;
}

}  // namespace detail

/// Dispersion, star discrepancy, distances and the dispersion lower bound for
/// every (sampler, k, trial) on [0,1]^d.
inline std::vector<TrialResult> run_spread_benchmark(const BenchmarkConfig& cfg) {
  const SearchSpace space = hypercube_space(cfg.d);
  return detail::run_jobs(cfg, [&](const detail::Job& job, TrialResult& r) {
    const SampleSet s = draw(job.sampler, space, job.k, detail::options_for(cfg, job));
    const MetricReport m = compute_report(to_point_set(space, s));
    r.metrics = {{"dispersion", m.dispersion.value},
                 {"dispersion_error_bound", m.dispersion.error_bound},
                 {"star_discrepancy", m.star_discrepancy.value},
                 {"dist_to_center", m.dist_to_center},
                 {"dist_to_origin", m.dist_to_origin},
                 {"lower_bound", m.lower_bound}};
  });
}

/// Squared distance from the centre and from the origin to the nearest point.
inline std::vector<TrialResult> run_distance_benchmark(const BenchmarkConfig& cfg) {
  const SearchSpace space = hypercube_space(cfg.d);
  return detail::run_jobs(cfg, [&](const detail::Job& job, TrialResult& r) {
    const SampleSet s = draw(job.sampler, space, job.k, detail::options_for(cfg, job));
    const PointSet ps = to_point_set(space, s);
    r.metrics = {{"dist_to_center", distance_to_center(ps)},
                 {"dist_to_origin", distance_to_origin(ps)}};
  });
}

/// Best-found-by-iteration curves on the synthetic task. The objective of
/// trial t depends only on (master_seed, t), so samplers are compared on the
/// same functions.
inline std::vector<TrialResult> run_synthetic_optimization(const BenchmarkConfig& cfg) {
  cfg.validate();
  const std::string regime = *cfg.objective;
  const SearchSpace space = synthetic_space(regime);
  return detail::run_jobs(cfg, [&](const detail::Job& job, TrialResult& r) {
    const auto f = SyntheticObjective::make(
        regime, derive_seed(cfg.master_seed, {hash_name("objective"), job.trial}));
    const SampleSet s = draw(job.sampler, space, job.k, detail::options_for(cfg, job));
    std::vector<std::vector<double>> z;
    double best = -INFINITY;
    for (const auto& c : s.points) {
      z.push_back(synthetic_projection(space, c));
      best = std::max(best, f(z.back()));
      r.best_found.push_back(best);
    }
    const double disp = dispersion(PointSet(z)).value;
    const double cert = optimization_error_certificate(disp, f.lipschitz);
    const double error = SyntheticObjective::kPeak - best;
    for (std::size_t i = 0; i < r.best_found.size(); ++i)
      r.metrics.emplace_back("best_found@" + std::to_string(i + 1), r.best_found[i]);
    r.metrics.emplace_back("optimum", SyntheticObjective::kPeak);
    r.metrics.emplace_back("error", error);
    r.metrics.emplace_back("dispersion", disp);
    r.metrics.emplace_back("lipschitz", f.lipschitz);
    r.metrics.emplace_back("certificate", cert);
  });
}

inline std::vector<TrialResult> run_benchmark(const BenchmarkConfig& cfg) {
  if (cfg.benchmark == "spread") return run_spread_benchmark(cfg);
  if (cfg.benchmark == "distance") return run_distance_benchmark(cfg);
  if (cfg.benchmark == "optimization") return run_synthetic_optimization(cfg);
  throw InvalidArgument("unknown benchmark '" + cfg.benchmark + "'");
}

// ---------------------------------------------------------------------------
// Aggregation and serialization

struct SummaryRow {
  std::string sampler;
  std::size_t k = 0;
  std::string metric;
  std::size_t n = 0;
  double mean = 0.0;
  double variance = 0.0;  // unbiased sample variance
  double ci95 = 0.0;      // half-width of the normal-approximation interval
};

/// Mean, variance and 95% interval per (sampler, k, metric), in first-seen order.
inline std::vector<SummaryRow> summarize(const std::vector<TrialResult>& results) {
  std::vector<SummaryRow> rows;
  std::map<std::tuple<std::string, std::size_t, std::string>, std::vector<double>> groups;
  for (const auto& r : results)
    for (const auto& [name, v] : r.metrics) {
      auto key = std::make_tuple(r.sampler, r.k, name);
      if (!groups.count(key)) rows.push_back({r.sampler, r.k, name, 0, 0, 0, 0});
      groups[key].push_back(v);
    }
  for (auto& row : rows) {
    const auto& v = groups[{row.sampler, row.k, row.metric}];
    row.n = v.size();
    double sum = 0.0;
    for (double x : v) sum += x;
    row.mean = sum / static_cast<double>(row.n);
    double ss = 0.0;
    for (double x : v) ss += (x - row.mean) * (x - row.mean);
    row.variance = row.n > 1 ? ss / static_cast<double>(row.n - 1) : 0.0;
    row.ci95 = 1.96 * std::sqrt(row.variance / static_cast<double>(row.n));
  }
  return rows;
}

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Long format: sampler,k,trial,metric,value.
inline std::string to_csv(const std::vector<TrialResult>& results) {
  std::ostringstream os;
  os << "sampler,k,trial,metric,value\n";
  for (const auto& r : results)
    for (const auto& [name, v] : r.metrics)
      os << r.sampler << ',' << r.k << ',' << r.trial << ',' << name << ','
         << format_double(v) << '\n';
  return os.str();
}

inline nlohmann::ordered_json to_json(const BenchmarkConfig& cfg,
                                      const std::vector<TrialResult>& results) {
  nlohmann::ordered_json j;
  j["benchmark"] = cfg.benchmark;
  j["master_seed"] = cfg.master_seed;
  j["d"] = cfg.d;
  j["samplers"] = cfg.samplers;
  j["k_values"] = cfg.k_values;
  j["trials"] = cfg.trials;
  if (cfg.objective) j["objective"] = *cfg.objective;
  auto summary = nlohmann::ordered_json::array();
  for (const auto& s : summarize(results))
    summary.push_back({{"sampler", s.sampler},
                       {"k", s.k},
                       {"metric", s.metric},
                       {"n", s.n},
                       {"mean", s.mean},
                       {"variance", s.variance},
                       {"ci95", s.ci95}});
  j["summary"] = std::move(summary);
  auto rows = nlohmann::ordered_json::array();
  for (const auto& r : results) {
    nlohmann::ordered_json m = nlohmann::ordered_json::object();
    for (const auto& [name, v] : r.metrics) m[name] = v;
    rows.push_back({{"sampler", r.sampler}, {"k", r.k}, {"trial", r.trial}, {"metrics", m}});
  }
  j["trials_table"] = std::move(rows);
  return j;
}

/// Base file name "<benchmark>_<master_seed>" for the CSV/JSON artifacts.
inline std::string artifact_stem(const BenchmarkConfig& cfg) {
  return cfg.benchmark + "_" + std::to_string(cfg.master_seed);
}

}  // namespace dppsearch

#endif  // DPPSEARCH_HARNESS_HPP
