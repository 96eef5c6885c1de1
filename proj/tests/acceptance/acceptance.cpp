// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any fail.
// Usage: acceptance <path-to-dppsearch-cli>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "dppsearch/dppsearch.hpp"
#include "oracles.hpp"

using namespace dppsearch;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances.
constexpr double kTvTolerance = 0.05;
constexpr double kChainRuleTolerance = 1e-8;
constexpr double kPlateauTolerance = 1e-12;
constexpr double kGridClosedFormTolerance = 1e-15;  // last-bit rounding of 1/(2(k-1))
constexpr double kLowerBoundSlack = 1e-9;
constexpr double kCertificateSlack = 1e-9;
constexpr std::size_t kOracleGrid = 2000;  // 2001 lattice points per axis
// One-sided 5% critical value of Student t with 99 degrees of freedom; Welch
// statistics with n = 100 per arm have at least this many.
constexpr double kOneSided95 = 1.6604;
constexpr double kMcmcBudgetSeconds = 120.0;
constexpr double kFigureBudgetSeconds = 600.0;
constexpr double kSequentialBudgetSeconds = 5.0;

constexpr int kRuns = 100000;

using Clock = std::chrono::steady_clock;
using SubsetLaw = std::map<std::vector<std::size_t>, double>;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Verdict {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

SubsetLaw normalize(const std::map<std::vector<std::size_t>, int>& counts, int n) {
  SubsetLaw p;
  for (const auto& [key, c] : counts) p[key] = static_cast<double>(c) / n;
  return p;
}

const Eigen::MatrixXd& reference_L() {
  static const Eigen::MatrixXd L =
      oracle::rbf_gram(oracle::reference_points(), oracle::reference_sigma());
  return L;
}

std::size_t reference_steps() {
  return static_cast<std::size_t>(std::ceil(5.0 * std::log(5.0) * 50.0));
}

// Welch statistic for "mean of a below mean of b".
double welch_below(const std::vector<double>& a, const std::vector<double>& b) {
  return oracle::welch_z(oracle::moments(b), oracle::moments(a));
}

// Brown-Forsythe: compare absolute deviations from the group median. Robust to
// the skew of dispersion and distance samples, unlike the F ratio.
std::vector<double> abs_dev_from_median(std::vector<double> v) {
  std::vector<double> s = v;
  std::sort(s.begin(), s.end());
  const std::size_t n = s.size();
  const double med = n % 2 ? s[n / 2] : 0.5 * (s[n / 2 - 1] + s[n / 2]);
  for (auto& x : v) x = std::abs(x - med);
  return v;
}

std::vector<double> collect(const std::vector<TrialResult>& rs, std::string_view sampler,
                            std::size_t k, std::string_view metric) {
  std::vector<double> v;
  for (const auto& r : rs)
    if (r.sampler == sampler && r.k == k) v.push_back(r.metric(metric));
  return v;
}

BenchmarkConfig bench(std::string benchmark, std::vector<std::string> samplers, std::size_t d,
                      std::vector<std::size_t> ks, std::size_t trials, std::uint64_t seed) {
  BenchmarkConfig c;
  c.benchmark = std::move(benchmark);
  c.samplers = std::move(samplers);
  c.d = d;
  c.k_values = std::move(ks);
  c.trials = trials;
  c.master_seed = seed;
  return c;
}

// --- criteria ---------------------------------------------------------------

Verdict discrete_mcmc() {
  const auto t0 = Clock::now();
  std::map<std::vector<std::size_t>, int> counts;
  for (int r = 0; r < kRuns; ++r)
    ++counts[kdpp_mcmc_discrete(reference_L(), 2, {reference_steps(), derive_seed(11, r)})];
  const double secs = seconds_since(t0);
  const double tv =
      oracle::total_variation(normalize(counts, kRuns), oracle::kdpp_distribution(reference_L(), 2));
  return {tv <= kTvTolerance && secs < kMcmcBudgetSeconds,
          fmt("TV %.4f (<= %.2f), %.1f s (< %.0f s)", tv, kTvTolerance, secs, kMcmcBudgetSeconds)};
}

Verdict mixed_mcmc_discretized() {
  const SearchSpace s =
      parse_space(R"({"dimensions": [{"name": "x", "kind": "integer", "bounds": [0, 4]}]})");
  std::map<std::vector<std::size_t>, int> counts;
  for (int r = 0; r < kRuns; ++r) {
    const auto set = kdpp_mcmc_mixed(s, 2, {oracle::reference_sigma(), 0.0},
                                     {reference_steps(), derive_seed(12, r)});
    std::vector<std::size_t> key;
    for (const auto& c : set.points)
      key.push_back(static_cast<std::size_t>(std::get<std::int64_t>(c.values.at("x"))));
    std::sort(key.begin(), key.end());
    ++counts[key];
  }
  const double tv =
      oracle::total_variation(normalize(counts, kRuns), oracle::kdpp_distribution(reference_L(), 2));
  return {tv <= kTvTolerance, fmt("TV %.4f (<= %.2f)", tv, kTvTolerance)};
}

Verdict sequential_matches_kdpp() {
  std::vector<FeatureVector> pool;
  for (double x : oracle::reference_points()) pool.push_back(FeatureVector::Constant(1, x));
  std::map<std::vector<std::size_t>, int> counts;
  for (int r = 0; r < kRuns; ++r) {
    auto idx = kdpp_sequential_pool(pool, 2, {oracle::reference_sigma(), 0.0}, derive_seed(13, r));
    std::sort(idx.begin(), idx.end());
    ++counts[idx];
  }
  const auto exact = oracle::kdpp_distribution(reference_L(), 2);
  const double tv = oracle::total_variation(normalize(counts, kRuns), exact);
  const double analytic =
      oracle::total_variation(oracle::sequential_pair_distribution(reference_L()), exact);
  return {tv <= kTvTolerance,
          fmt("TV %.4f (<= %.2f); analytic TV of the sequential law %.4f", tv, kTvTolerance,
              analytic)};
}

// Random sets in [0,1]^d with the default bandwidth for a budget of k.
Verdict chain_rule() {
  Rng rng(14);
  double worst = 0.0;
  int checked = 0, singular = 0;
  for (int t = 0; t < 1000; ++t) {
    const std::size_t k = 1 + rng.index(10);
    const std::size_t d = 1 + rng.index(4);
    const KernelConfig cfg{KernelConfig::for_budget(k).sigma, 0.0};
    std::vector<FeatureVector> pts;
    for (std::size_t i = 0; i < k; ++i) {
      FeatureVector v(static_cast<Eigen::Index>(d));
      for (auto& x : v) x = rng.uniform();
      pts.push_back(v);
    }
    const std::vector<double> q(k, 1.0);
    const double ld = logdet(build_L(pts, q, cfg));
    PosteriorVariance state(cfg);
    double sum = 0.0;
    try {
      for (const auto& p : pts) {
        sum += std::log(state.variance(p));
        state.add(p);
      }
    } catch (const DegenerateError&) {
      sum = kNegInf;
    }
    if (ld == kNegInf || sum == kNegInf) {
      ++singular;
      continue;
    }
    worst = std::max(worst, std::abs(ld - sum));
    ++checked;
  }
  return {worst <= kChainRuleTolerance && checked >= 990,
          fmt("max |logdet - sum ln var| %.2e (<= %.0e) over %d sets, %d singular skipped", worst,
              kChainRuleTolerance, checked, singular)};
}

Verdict sobol_plateaus() {
  std::vector<std::size_t> ks;
  for (std::size_t k = 42; k <= 61; ++k) ks.push_back(k);
  for (std::size_t k = 84; k <= 125; ++k) ks.push_back(k);
  const auto rs = run_spread_benchmark(bench("spread", {"sobol-unrotated"}, 1, ks, 1, 15));
  std::map<std::size_t, double> disp;
  for (const auto& r : rs) disp[r.k] = r.metric("dispersion");
  auto spread = [&](std::size_t lo, std::size_t hi, std::size_t& where) {
    double worst = 0.0;
    for (std::size_t k = lo; k <= hi; ++k) {
      const double dev = std::abs(disp[k] - disp[lo]);
      if (dev > worst) {
        worst = dev;
        where = k;
      }
    }
    return worst;
  };
  std::size_t at1 = 0, at2 = 0;
  const double s1 = spread(42, 61, at1), s2 = spread(84, 125, at2);
  return {s1 <= kPlateauTolerance && s2 <= kPlateauTolerance,
          fmt("42..61: d(42)=%.6g, max deviation %.3g%s; 84..125: d(84)=%.6g, max deviation %.3g%s",
              disp[42], s1, at1 ? fmt(" first at k=%zu", at1).c_str() : "", disp[84], s2,
              at2 ? fmt(" first at k=%zu", at2).c_str() : "")};
}

Verdict grid_closed_form() {
  std::vector<std::size_t> ks;
  for (std::size_t k = 2; k <= 200; ++k) ks.push_back(k);
  double worst = 0.0;
  for (const auto& r : run_spread_benchmark(bench("spread", {"grid"}, 1, ks, 1, 16)))
    worst = std::max(worst, std::abs(r.metric("dispersion") - 1.0 / (2.0 * static_cast<double>(r.k - 1))));
  return {worst <= kGridClosedFormTolerance, fmt("max deviation %.2e over k=2..200", worst)};
}

Verdict lower_bound_all_samplers() {
  std::vector<std::size_t> ks;
  for (std::size_t k = 2; k <= 100; ++k) ks.push_back(k);
  double worst = INFINITY;
  std::size_t sets = 0;
  for (std::size_t d : {1, 2}) {
    auto cfg = bench("spread", {"uniform", "grid", "sobol", "sobol-unrotated", "kdpp-mcmc", "kdpp-seq"},
                     d, ks, 1, 17);
    cfg.steps = 2000;
    cfg.pool = 1000;
    for (const auto& r : run_spread_benchmark(cfg)) {
      worst = std::min(worst, r.metric("dispersion") - r.metric("lower_bound"));
      ++sets;
    }
  }
  return {worst >= -kLowerBoundSlack,
          fmt("min (d_k - bound) %.3g over %zu sets", worst, sets)};
}

Verdict dpp_spreads_better_2d() {
  const auto t0 = Clock::now();
  auto cfg = bench("spread", {"uniform", "kdpp-seq"}, 2, {16, 32, 64}, 100, 18);
  const auto rs = run_spread_benchmark(cfg);
  const double secs = seconds_since(t0);
  bool pass = secs < kFigureBudgetSeconds;
  std::string detail;
  for (std::size_t k : cfg.k_values) {
    const auto dpp = collect(rs, "kdpp-seq", k, "dispersion");
    const auto uni = collect(rs, "uniform", k, "dispersion");
    const double z_mean = welch_below(dpp, uni);
    const double z_var = welch_below(abs_dev_from_median(dpp), abs_dev_from_median(uni));
    pass = pass && z_mean > kOneSided95 && z_var > kOneSided95;
    detail += fmt("k=%zu mean %.4f vs %.4f (t %.1f), var %.2e vs %.2e (BF t %.1f); ", k,
                  oracle::moments(dpp).mean, oracle::moments(uni).mean, z_mean,
                  oracle::moments(dpp).var, oracle::moments(uni).var, z_var);
  }
  return {pass, detail + fmt("critical %.4f, %.1f s", kOneSided95, secs)};
}

Verdict dpp_nearer_origin() {
  const auto rs = run_distance_benchmark(bench("distance", {"uniform", "sobol", "kdpp-seq"}, 2, {32}, 100, 19));
  const auto dpp = collect(rs, "kdpp-seq", 32, "dist_to_origin");
  const auto uni = collect(rs, "uniform", 32, "dist_to_origin");
  const auto sob = collect(rs, "sobol", 32, "dist_to_origin");
  const double zu = welch_below(dpp, uni), zs = welch_below(dpp, sob);
  return {zu > kOneSided95 && zs > kOneSided95,
          fmt("mean %.2e vs uniform %.2e (t %.2f), vs sobol %.2e (t %.2f); critical %.4f",
              oracle::moments(dpp).mean, oracle::moments(uni).mean, zu, oracle::moments(sob).mean,
              zs, kOneSided95)};
}

Verdict lipschitz_certificate() {
  double worst = -INFINITY;
  std::size_t trials = 0;
  for (const std::string regime : {"hard", "medium", "easy"}) {
    auto cfg = bench("optimization", {"uniform", "kdpp-mcmc", "kdpp-seq"}, 0, {5, 10, 20, 40}, 25, 20);
    cfg.objective = regime;
    cfg.steps = 3000;
    cfg.pool = 300;
    for (const auto& r : run_synthetic_optimization(cfg)) {
      worst = std::max(worst, r.metric("optimum") - r.best_found.back() - r.metric("certificate"));
      ++trials;
    }
  }
  return {worst <= kCertificateSlack,
          fmt("max (gap - L d_k) %.3g over %zu trials", worst, trials)};
}

Verdict metrics_vs_brute_force() {
  Rng rng(21);
  double worst_disp = -INFINITY, worst_disc = -INFINITY;
  for (int t = 0; t < 100; ++t) {
    const std::size_t d = 1 + static_cast<std::size_t>(t % 2);
    std::vector<std::vector<double>> p(1 + rng.index(12), std::vector<double>(d));
    for (auto& x : p)
      for (auto& c : x) c = rng.uniform();
    const PointSet ps(p);
    const double n = static_cast<double>(kOracleGrid);
    const double dd = static_cast<double>(d);
    // Oracles are lower estimates; exact value must lie in [oracle, oracle + err].
    const double disp = dispersion(ps).value, disp_o = oracle::grid_dispersion(p, kOracleGrid);
    const double disc = star_discrepancy(ps).value,
                 disc_o = oracle::grid_star_discrepancy(p, kOracleGrid);
    worst_disp = std::max({worst_disp, disp_o - disp, disp - disp_o - std::sqrt(dd) / (2.0 * n)});
    worst_disc = std::max({worst_disc, disc_o - disc, disc - disc_o - dd / n});
  }
  return {worst_disp <= 1e-12 && worst_disc <= 1e-12,
          fmt("worst excess over oracle bracket: dispersion %.3g, star discrepancy %.3g",
              worst_disp, worst_disc)};
}

struct Shell {
  int code;
  std::string out;
};

Shell shell(const std::string& cmd) {
  FILE* pipe = popen((cmd + " 2>&1").c_str(), "r");
  if (!pipe) return {-1, {}};
  std::string out;
  char buf[4096];
  while (std::size_t n = std::fread(buf, 1, sizeof buf, pipe)) out.append(buf, n);
  return {pclose(pipe), out};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Verdict cli_determinism(const std::string& cli) {
  const fs::path dir = fs::temp_directory_path() / "dppsearch_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);
  std::ofstream(dir / "space.json") << R"({"dimensions": [
      {"name": "lr", "kind": "continuous", "bounds": [1e-4, 1e-1], "scale": "log"},
      {"name": "layers", "kind": "integer", "bounds": [1, 4]},
      {"name": "dropout", "kind": "continuous", "bounds": [0, 0.5]}]})";
  std::ofstream(dir / "bench.json") << R"({"benchmark": "spread",
      "samplers": ["uniform", "sobol", "kdpp-mcmc", "kdpp-seq"], "d": 2, "k_values": [4, 9],
      "trials": 3, "master_seed": 5, "steps": 500, "pool": 100})";
  int checked = 0;
  std::string bad;
  for (const std::string method : {"uniform", "grid", "sobol", "sobol-unrotated", "kdpp-mcmc", "kdpp-seq"}) {
    const std::string cmd =
        cli + " sample --space " + (dir / "space.json").string() + " --k 12 --seed 99 --method " + method;
    const Shell a = shell(cmd), b = shell(cmd);
    ++checked;
    if (a.code != 0 || a.out != b.out || a.out.empty()) bad += method + " ";
  }
  for (const char* out : {"a", "b"}) {
    const Shell r = shell(cli + " bench --config " + (dir / "bench.json").string() + " --out " +
                          (dir / out).string());
    if (r.code != 0) bad += std::string("bench-") + out + " ";
  }
  for (const char* ext : {".csv", ".json"}) {
    const std::string a = slurp(dir / "a" / ("spread_5" + std::string(ext)));
    ++checked;
    if (a.empty() || a != slurp(dir / "b" / ("spread_5" + std::string(ext))))
      bad += std::string("bench") + ext + " ";
  }
  fs::remove_all(dir);
  return {bad.empty(), fmt("%d invocations compared twice%s%s", checked, bad.empty() ? "" : "; differ: ",
                           bad.c_str())};
}

Verdict sequential_performance() {
  const SearchSpace s = hypercube_space(2);
  const auto t0 = Clock::now();
  const auto set = kdpp_sequential(s, 100, KernelConfig::for_budget(100), 1000, 22);
  const double secs = seconds_since(t0);
  return {set.points.size() == 100 && secs < kSequentialBudgetSeconds,
          fmt("%.2f s (< %.0f s), %zu threads", secs, kSequentialBudgetSeconds, default_threads())};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: acceptance <dppsearch-cli>\n";
    return 2;
  }
  const std::string cli = argv[1];
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"discrete k-DPP MCMC matches exact law (N=5, k=2)", discrete_mcmc},
      {"mixed-space MCMC matches exact law on discretized space", mixed_mcmc_discretized},
      {"sequential posterior-variance sampling matches k-DPP law", sequential_matches_kdpp},
      {"chain rule: logdet = sum of log posterior variances", chain_rule},
      {"unrotated 1-d Sobol dispersion constant on 42..61 and 84..125", sobol_plateaus},
      {"grid dispersion equals 1/(2(k-1)), k=2..200", grid_closed_form},
      {"every sampler respects the dispersion lower bound", lower_bound_all_samplers},
      {"k-DPP beats uniform on dispersion mean and variance (d=2)", dpp_spreads_better_2d},
      {"k-DPP nearer the origin than uniform and Sobol (d=2, k=32)", dpp_nearer_origin},
      {"optimization gap bounded by Lipschitz constant times dispersion", lipschitz_certificate},
      {"exact metrics agree with 2001^d lattice oracles", metrics_vs_brute_force},
      {"CLI and benchmark output byte-reproducible", [&] { return cli_determinism(cli); }},
      {"sequential k=100, pool 1000, d=2 under 5 s", sequential_performance},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    const auto t0 = Clock::now();
    Verdict v;
    try {
      v = fn();
    } catch (const std::exception& e) {
      v = {false, std::string("threw: ") + e.what()};
    }
    failed += !v.pass;
    std::cout << (v.pass ? "PASS  " : "FAIL  ") << name << "  [" << v.detail << "] ("
              << fmt("%.1f s", seconds_since(t0)) << ")" << std::endl;
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed\n";
  return failed ? 1 : 0;
}
