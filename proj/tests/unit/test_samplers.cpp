#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include <gtest/gtest.h>

#include "dppsearch/samplers.hpp"
#include "oracles.hpp"

using namespace dppsearch;

namespace {

using SubsetLaw = std::map<std::vector<std::size_t>, double>;

// Chain length N ln N * 50 for the five-item instance.
const std::size_t kReferenceSteps =
    static_cast<std::size_t>(std::ceil(5.0 * std::log(5.0) * 50.0));

SearchSpace five_values() {
  return parse_space(R"({"dimensions": [{"name": "x", "kind": "integer", "bounds": [0, 4]}]})");
}

SubsetLaw normalize(const std::map<std::vector<std::size_t>, int>& counts, int n) {
  SubsetLaw p;
  for (const auto& [key, c] : counts) p[key] = static_cast<double>(c) / n;
  return p;
}

std::vector<double> coords(const SearchSpace& s, const SampleSet& set, std::size_t j = 0) {
  std::vector<double> out;
  for (const auto& c : set.points) out.push_back(unit_coordinates(s, c)[j]);
  return out;
}

double min_pairwise_distance(const SearchSpace& s, const SampleSet& set) {
  double best = INFINITY;
  for (std::size_t i = 0; i < set.points.size(); ++i)
    for (std::size_t j = 0; j < i; ++j)
      best = std::min(best, (encode(s, set.points[i]) - encode(s, set.points[j])).norm());
  return best;
}

}  // namespace

TEST(Uniform, KolmogorovDistance) {
  const SearchSpace s = hypercube_space(1);
  const auto set = uniform_sample(s, 1000, 77);
  ASSERT_EQ(set.points.size(), 1000u);
  EXPECT_LT(oracle::ks_uniform(coords(s, set)), 0.05);
}

TEST(Uniform, DeterministicAndSeedSensitive) {
  const SearchSpace s = hypercube_space(3);
  EXPECT_EQ(uniform_sample(s, 10, 5).points, uniform_sample(s, 10, 5).points);
  EXPECT_NE(uniform_sample(s, 10, 5).points, uniform_sample(s, 10, 6).points);
  EXPECT_THROW(uniform_sample(s, 0, 5), InvalidArgument);
}

TEST(Grid, OneDimensionFivePoints) {
  const SearchSpace s = hypercube_space(1);
  EXPECT_EQ(coords(s, grid_sample(s, 5)), (std::vector<double>{0, .25, .5, .75, 1}));
}

TEST(Grid, TwoDimensionsLexicographicTruncation) {
  const SearchSpace s = hypercube_space(2);
  const auto set = grid_sample(s, 5);
  EXPECT_EQ(set.diagnostics.at("m"), 2.0);
  const std::vector<std::vector<double>> expected = {
      {0, 0}, {0, .5}, {0, 1}, {.5, 0}, {.5, .5}};
  for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(unit_coordinates(s, set.points[i]), expected[i]);
}

TEST(Grid, MaximumSpacingOneDimension) {
  const SearchSpace s = hypercube_space(1);
  for (std::size_t k = 2; k <= 50; ++k) {
    auto x = coords(s, grid_sample(s, k));
    std::sort(x.begin(), x.end());
    double gap = 0.0;
    for (std::size_t i = 1; i < x.size(); ++i) gap = std::max(gap, x[i] - x[i - 1]);
    EXPECT_NEAR(gap, 1.0 / static_cast<double>(k - 1), 1e-15);
  }
}

TEST(Grid, SinglePoint) {
  const SearchSpace s = hypercube_space(3);
  EXPECT_EQ(unit_coordinates(s, grid_sample(s, 1).points[0]), (std::vector<double>{0, 0, 0}));
}

TEST(Grid, MapsThroughBounds) {
  const SearchSpace s = parse_space(R"({"dimensions": [
      {"name": "lr", "kind": "continuous", "bounds": [0.001, 0.1], "scale": "log"},
      {"name": "n", "kind": "integer", "bounds": [10, 20]}]})");
  const auto set = grid_sample(s, 9);
  EXPECT_NEAR(std::get<double>(set.points[4].values.at("lr")), 0.01, 1e-15);
  EXPECT_EQ(std::get<std::int64_t>(set.points[4].values.at("n")), 15);
}

TEST(Grid, RejectsTrees) {
  const SearchSpace s = parse_space(R"({"dimensions": [{"name": "b", "kind": "boolean"}]})");
  EXPECT_THROW(grid_sample(s, 3), UnsupportedSpace);
  EXPECT_THROW(sobol_sample(s, 3, true, 1), UnsupportedSpace);
}

TEST(SobolSampler, UnrotatedOneDimension) {
  const SearchSpace s = hypercube_space(1);
  EXPECT_EQ(coords(s, sobol_sample(s, 3, false, 0)), (std::vector<double>{0, .5, .75}));
  EXPECT_EQ(sobol_sample(s, 3, false, 0).sampler, "sobol-unrotated");
}

TEST(SobolSampler, RotationIsSeededShift) {
  const SearchSpace s = hypercube_space(2);
  const auto a = sobol_sample(s, 16, true, 3);
  const auto b = sobol_sample(s, 16, true, 3);
  const auto c = sobol_sample(s, 16, true, 4);
  EXPECT_EQ(a.points, b.points);
  EXPECT_NE(a.points, c.points);
  // the shift is common to all points
  const auto plain = sobol_sample(s, 16, false, 0);
  for (std::size_t j = 0; j < 2; ++j) {
    const double shift = unit_coordinates(s, a.points[0])[j];
    for (std::size_t i = 0; i < 16; ++i) {
      const double expected = std::fmod(unit_coordinates(s, plain.points[i])[j] + shift, 1.0);
      EXPECT_NEAR(unit_coordinates(s, a.points[i])[j], expected, 1e-15);
    }
  }
}

// --- discrete MCMC ----------------------------------------------------------

TEST(DiscreteMcmc, FullSetWhenKEqualsN) {
  const Eigen::MatrixXd L = Eigen::MatrixXd::Identity(4, 4);
  EXPECT_EQ(kdpp_mcmc_discrete(L, 4, {10, 1}), (std::vector<std::size_t>{0, 1, 2, 3}));
  EXPECT_THROW(kdpp_mcmc_discrete(L, 5, {10, 1}), InvalidArgument);
  EXPECT_THROW(kdpp_mcmc_discrete(L, 0, {10, 1}), InvalidArgument);
}

TEST(DiscreteMcmc, IdentityKernelIsUniformOverSubsets) {
  const Eigen::MatrixXd L = Eigen::MatrixXd::Identity(5, 5);
  const int runs = 20000;
  std::map<std::vector<std::size_t>, int> counts;
  for (int r = 0; r < runs; ++r)
    ++counts[kdpp_mcmc_discrete(L, 2, {kReferenceSteps, derive_seed(100, r)})];
  ASSERT_EQ(counts.size(), 10u);
  double chi2 = 0.0;
  const double expected = runs / 10.0;
  for (const auto& [_, c] : counts) chi2 += (c - expected) * (c - expected) / expected;
  EXPECT_LT(chi2, 21.666);  // chi-square, 9 dof, alpha = 0.01
}

TEST(DiscreteMcmc, MatchesExactLawOnReferenceInstance) {
  const Eigen::MatrixXd L =
      oracle::rbf_gram(oracle::reference_points(), oracle::reference_sigma());
  const int runs = 20000;
  std::map<std::vector<std::size_t>, int> counts;
  for (int r = 0; r < runs; ++r)
    ++counts[kdpp_mcmc_discrete(L, 2, {kReferenceSteps, derive_seed(200, r)})];
  EXPECT_LT(oracle::total_variation(normalize(counts, runs), oracle::kdpp_distribution(L, 2)),
            0.05);
}

TEST(DiscreteMcmc, DetailedBalanceLargerInstance) {
  const std::vector<double> x = {0.0, 0.1, 0.2, 0.45, 0.5, 0.8, 0.9};
  const Eigen::MatrixXd L = oracle::rbf_gram(x, 0.3);
  const int runs = 20000;
  const std::size_t steps = static_cast<std::size_t>(std::ceil(7.0 * std::log(7.0) * 50.0));
  std::map<std::vector<std::size_t>, int> counts;
  for (int r = 0; r < runs; ++r) ++counts[kdpp_mcmc_discrete(L, 3, {steps, derive_seed(300, r)})];
  EXPECT_LT(oracle::total_variation(normalize(counts, runs), oracle::kdpp_distribution(L, 3)),
            0.05);
}

// --- mixed MCMC -------------------------------------------------------------

TEST(MixedMcmc, SinglePointIsUniform) {
  const SearchSpace s = hypercube_space(1);
  std::vector<double> x;
  for (int r = 0; r < 10000; ++r) {
    const auto set = kdpp_mcmc_mixed(s, 1, {0.5, 0.0}, {50, derive_seed(400, r)});
    x.push_back(unit_coordinates(s, set.points[0])[0]);
  }
  EXPECT_LT(oracle::ks_uniform(x), 0.05);
}

TEST(MixedMcmc, DuplicateProposalNeverAccepted) {
  // Two boolean values, k = 2: once both are held, every proposal duplicates.
  const SearchSpace s = parse_space(R"({"dimensions": [{"name": "b", "kind": "boolean"}]})");
  for (int r = 0; r < 200; ++r) {
    const auto set = kdpp_mcmc_mixed(s, 2, {1.0, 0.0}, {200, derive_seed(500, r)});
    EXPECT_NE(set.points[0], set.points[1]);
  }
}

TEST(MixedMcmc, DiscretizedSpaceMatchesExactLaw) {
  const SearchSpace s = five_values();
  const Eigen::MatrixXd L =
      oracle::rbf_gram(oracle::reference_points(), oracle::reference_sigma());
  const int runs = 10000;
  std::map<std::vector<std::size_t>, int> counts;
  for (int r = 0; r < runs; ++r) {
    const auto set =
        kdpp_mcmc_mixed(s, 2, {oracle::reference_sigma(), 0.0}, {kReferenceSteps, derive_seed(600, r)});
    std::vector<std::size_t> key;
    for (const auto& c : set.points)
      key.push_back(static_cast<std::size_t>(std::get<std::int64_t>(c.values.at("x"))));
    std::sort(key.begin(), key.end());
    ++counts[key];
  }
  EXPECT_LT(oracle::total_variation(normalize(counts, runs), oracle::kdpp_distribution(L, 2)),
            0.05);
}

TEST(MixedMcmc, PositionsAreExchangeable) {
  const SearchSpace s = hypercube_space(1);
  const std::size_t k = 5;
  std::vector<std::vector<double>> by_position(k);
  std::vector<double> all;
  for (int r = 0; r < 2000; ++r) {
    const auto set = kdpp_mcmc_mixed(s, k, KernelConfig::for_budget(k), {500, derive_seed(700, r)});
    const auto x = coords(s, set);
    for (std::size_t i = 0; i < k; ++i) {
      by_position[i].push_back(x[i]);
      all.push_back(x[i]);
    }
  }
  const auto pooled = oracle::moments(all);
  for (std::size_t i = 0; i < k; ++i) {
    const auto m = oracle::moments(by_position[i]);
    EXPECT_LT(std::abs(m.mean - pooled.mean), 3.0 * std::sqrt(m.var / static_cast<double>(m.n)))
        << "position " << i;
  }
}

TEST(MixedMcmc, AcceptanceRateAtMostHalf) {
  const SearchSpace tree = parse_space(R"({"dimensions": [
      {"name": "a", "kind": "categorical", "categories": ["x", "y", "z"]},
      {"name": "b", "kind": "boolean", "children": [
        {"when": true, "dimension": {"name": "c", "kind": "continuous", "bounds": [1, 100],
                                     "scale": "log"}}]}]})");
  for (std::size_t k : {1, 2, 5, 10}) {
    const auto set = kdpp_mcmc_mixed(tree, k, KernelConfig::for_budget(k), {2000, k});
    const double rate = set.diagnostics.at("acceptance_rate");
    EXPECT_GE(rate, 0.0);
    EXPECT_LE(rate, 0.5);
    for (const auto& c : set.points) EXPECT_NO_THROW(validate(tree, c));
  }
}

TEST(MixedMcmc, MoreDiverseThanUniform) {
  const SearchSpace s = hypercube_space(2);
  const std::size_t k = 20;
  std::vector<double> dpp, uni;
  for (int t = 0; t < 200; ++t) {
    dpp.push_back(min_pairwise_distance(
        s, kdpp_mcmc_mixed(s, k, KernelConfig::for_budget(k), {5000, derive_seed(800, t)})));
    uni.push_back(min_pairwise_distance(s, uniform_sample(s, k, derive_seed(801, t))));
  }
  EXPECT_GT(oracle::welch_z(oracle::moments(dpp), oracle::moments(uni)), 2.326);  // alpha 0.01
}

// --- sequential -------------------------------------------------------------

TEST(Sequential, FirstPointIsUniform) {
  const SearchSpace s = hypercube_space(1);
  std::vector<double> x;
  for (int r = 0; r < 5000; ++r)
    x.push_back(coords(s, kdpp_sequential(s, 1, {0.5, 1e-10}, 100, derive_seed(900, r), 1))[0]);
  EXPECT_LT(oracle::ks_uniform(x), 1.63 / std::sqrt(5000.0));
}

TEST(Sequential, TwoCandidatesProportionalToSchurComplement) {
  const KernelConfig cfg{0.4, 0.0};
  PosteriorVariance state(cfg);
  FeatureVector a(1), b(1), c(1);
  a << 0.2;
  b << 0.35;
  c << 0.9;
  state.add(a);
  const double rb = std::exp(-0.15 * 0.15 / (2 * 0.16));
  const double rc = std::exp(-0.7 * 0.7 / (2 * 0.16));
  const std::vector<double> w = {state.variance(b), state.variance(c)};
  EXPECT_NEAR(w[0], 1 - rb * rb, 1e-14);
  EXPECT_NEAR(w[1], 1 - rc * rc, 1e-14);
  Rng rng(3);
  int picked_b = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) picked_b += pick_proportional(w, rng) == 0;
  const double p = (1 - rb * rb) / (2 - rb * rb - rc * rc);
  EXPECT_NEAR(static_cast<double>(picked_b) / n, p, 4.0 * std::sqrt(p * (1 - p) / n));
}

TEST(Sequential, FixedPoolFollowsItsExactLaw) {
  std::vector<FeatureVector> pool;
  for (double x : oracle::reference_points()) pool.push_back(FeatureVector::Constant(1, x));
  const Eigen::MatrixXd K =
      oracle::rbf_gram(oracle::reference_points(), oracle::reference_sigma());
  const int runs = 20000;
  std::map<std::vector<std::size_t>, int> counts;
  for (int r = 0; r < runs; ++r) {
    auto idx = kdpp_sequential_pool(pool, 2, {oracle::reference_sigma(), 0.0}, derive_seed(1000, r));
    std::sort(idx.begin(), idx.end());
    ++counts[idx];
  }
  EXPECT_LT(oracle::total_variation(normalize(counts, runs),
                                    oracle::sequential_pair_distribution(K)),
            0.03);
}

TEST(Sequential, ExtendReproducesSequentialBitwise) {
  const SearchSpace s = parse_space(R"({"dimensions": [
      {"name": "lr", "kind": "continuous", "bounds": [0.0001, 1], "scale": "log"},
      {"name": "act", "kind": "categorical", "categories": ["relu", "tanh"]},
      {"name": "l2", "kind": "boolean", "children": [
        {"when": true, "dimension": {"name": "s", "kind": "continuous", "bounds": [0, 1]}}]}]})");
  const std::size_t k = 12;
  const KernelConfig cfg = KernelConfig::for_budget(k);
  const auto direct = kdpp_sequential(s, k, cfg, 200, 42);
  SampleSet grown{{}, "kdpp-seq", 42, {}};
  for (std::size_t i = 0; i < k; ++i) {
    const auto next = extend_sample(s, grown, cfg, 200, sequential_step_seed(42, i));
    ASSERT_EQ(next.points.size(), i + 1);
    for (std::size_t j = 0; j < i; ++j) EXPECT_EQ(next.points[j], grown.points[j]);
    grown = next;
  }
  EXPECT_EQ(grown.points, direct.points);
}

TEST(Sequential, ExtendEmptyIsUniform) {
  const SearchSpace s = hypercube_space(1);
  std::vector<double> x;
  const SampleSet empty;
  for (int r = 0; r < 5000; ++r)
    x.push_back(coords(s, extend_sample(s, empty, {0.3, 1e-10}, 50, derive_seed(1100, r), 1))[0]);
  EXPECT_LT(oracle::ks_uniform(x), 1.63 / std::sqrt(5000.0));
}

TEST(Sequential, ThreadCountDoesNotChangeOutput) {
  const SearchSpace s = hypercube_space(2);
  const KernelConfig cfg = KernelConfig::for_budget(10);
  EXPECT_EQ(kdpp_sequential(s, 10, cfg, 300, 9, 1).points,
            kdpp_sequential(s, 10, cfg, 300, 9, 4).points);
}

TEST(Sequential, DegeneratePoolThrows) {
  // Only two distinct configurations exist; a third has zero posterior variance.
  const SearchSpace s = parse_space(R"({"dimensions": [{"name": "b", "kind": "boolean"}]})");
  EXPECT_THROW(kdpp_sequential(s, 3, {1.0, 0.0}, 20, 1), DegenerateError);
  const std::vector<FeatureVector> same(3, FeatureVector::Constant(2, 0.5));
  EXPECT_THROW(kdpp_sequential_pool(same, 2, {1.0, 0.0}, 1), DegenerateError);
  const std::vector<double> zeros(4, 0.0);
  Rng rng(1);
  EXPECT_THROW(pick_proportional(zeros, rng), DegenerateError);
}

// --- dispatch ---------------------------------------------------------------

TEST(Draw, EverySamplerIsDeterministicAndValid) {
  const SearchSpace s = hypercube_space(2);
  SamplerOptions opt;
  opt.seed = 123;
  opt.steps = 300;
  opt.pool = 100;
  for (auto name : kSamplerNames) {
    const auto a = draw(name, s, 7, opt);
    const auto b = draw(name, s, 7, opt);
    ASSERT_EQ(a.points.size(), 7u) << name;
    EXPECT_EQ(a.points, b.points) << name;
    EXPECT_EQ(a.sampler, std::string(name));
    for (const auto& c : a.points) EXPECT_NO_THROW(validate(s, c));
  }
  EXPECT_THROW(draw("latin", s, 3, opt), InvalidArgument);
  EXPECT_THROW(draw("uniform", s, 0, opt), InvalidArgument);
}

TEST(Draw, DefaultMixingBudget) {
  EXPECT_EQ(McmcSettings::default_steps(1), 5000u);
  EXPECT_EQ(McmcSettings::default_steps(10),
            static_cast<std::size_t>(std::ceil(500.0 * 10 * std::log(11.0))));
}
