#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "dppsearch/metrics.hpp"
#include "dppsearch/rng.hpp"
#include "oracles.hpp"

using namespace dppsearch;

namespace {

using Points = std::vector<std::vector<double>>;

Points random_points(Rng& rng, std::size_t k, std::size_t d) {
  Points p(k, std::vector<double>(d));
  for (auto& x : p)
    for (auto& c : x) c = rng.uniform();
  return p;
}

Points grid_1d(std::size_t k) {
  Points p;
  for (std::size_t i = 0; i < k; ++i) p.push_back({static_cast<double>(i) / static_cast<double>(k - 1)});
  return p;
}

}  // namespace

TEST(PointSetTest, Validation) {
  EXPECT_THROW(PointSet(Points{}), InvalidArgument);
  EXPECT_THROW(PointSet(Points{{0.5}, {0.1, 0.2}}), InvalidArgument);
  EXPECT_THROW(PointSet(Points{{1.5}}), InvalidArgument);
  EXPECT_THROW(PointSet(Points{{-0.1}}), InvalidArgument);
  EXPECT_THROW(PointSet(Points{{}}), InvalidArgument);
  EXPECT_NO_THROW(PointSet(Points{{0.0, 1.0}}));
}

TEST(Dispersion, EvenlySpacedLine) {
  for (std::size_t k = 2; k <= 40; ++k) {
    const auto r = dispersion(PointSet(grid_1d(k)));
    EXPECT_EQ(r.method, MetricMethod::exact);
    EXPECT_NEAR(r.value, 1.0 / (2.0 * static_cast<double>(k - 1)), 1e-15);
  }
}

TEST(Dispersion, SingleMidpoint) { EXPECT_EQ(dispersion(PointSet(Points{{0.5}})).value, 0.5); }

TEST(Dispersion, OppositeCorners) {
  EXPECT_NEAR(dispersion(PointSet(Points{{0, 0}, {1, 1}})).value, 1.0, 1e-15);
}

TEST(Dispersion, SinglePointInSquare) {
  EXPECT_NEAR(dispersion(PointSet(Points{{0.5, 0.5}})).value, std::sqrt(0.5), 1e-15);
  EXPECT_NEAR(dispersion(PointSet(Points{{0.2, 0.1}})).value, std::hypot(0.8, 0.9), 1e-15);
}

TEST(Dispersion, DuplicatePoints) {
  EXPECT_NEAR(dispersion(PointSet(Points{{0.3, 0.3}, {0.3, 0.3}})).value, std::hypot(0.7, 0.7),
              1e-15);
}

TEST(Dispersion, HighDimensionIsGridApproximation) {
  const auto r = dispersion(PointSet(Points{{0.5, 0.5, 0.5}}), 1.0 / 16.0);
  EXPECT_EQ(r.method, MetricMethod::grid_approx);
  EXPECT_EQ(r.resolution, 1.0 / 16.0);
  EXPECT_NEAR(r.value, std::sqrt(0.75), 1e-15);  // corners lie on the lattice
  EXPECT_NEAR(r.error_bound, std::sqrt(3.0) / 32.0, 1e-15);
  EXPECT_THROW(dispersion(PointSet(Points{{0.5, 0.5, 0.5}}), 0.0), InvalidArgument);
}

TEST(LowerBound, KnownValues) {
  for (std::size_t k = 1; k <= 100; ++k)
    EXPECT_NEAR(dispersion_lower_bound(k, 1), 1.0 / (2.0 * static_cast<double>(k)), 1e-15);
  EXPECT_NEAR(dispersion_lower_bound(1, 2), 0.564190, 1e-6);
  EXPECT_NEAR(dispersion_lower_bound(1, 2), 1.0 / std::sqrt(std::numbers::pi), 1e-15);
  EXPECT_THROW(dispersion_lower_bound(0, 2), InvalidArgument);
}

TEST(LowerBound, GridIsConsistent) {
  for (std::size_t k = 2; k <= 200; ++k)
    EXPECT_LE(dispersion_lower_bound(k, 1), dispersion(PointSet(grid_1d(k))).value);
}

TEST(StarDiscrepancy, KnownValues) {
  EXPECT_EQ(star_discrepancy(PointSet(Points{{0.5}})).value, 0.5);
  EXPECT_EQ(star_discrepancy(PointSet(Points{{0.0}})).value, 1.0);
  EXPECT_EQ(star_discrepancy(PointSet(Points{{0.0, 0.0}})).value, 1.0);
  EXPECT_EQ(star_discrepancy(PointSet(Points{{1.0}})).value, 1.0);
  // van der Corput prefix {0, 1/2}: worst box is [0, 1/2) holding one point
  EXPECT_EQ(star_discrepancy(PointSet(Points{{0.0}, {0.5}})).value, 0.5);
}

TEST(StarDiscrepancy, LineGridAgainstDenseOracle) {
  for (std::size_t k = 2; k <= 12; ++k) {
    const Points p = grid_1d(k);
    const double exact = star_discrepancy(PointSet(p)).value;
    const std::size_t n = 10 * 1000;
    const double grid = oracle::grid_star_discrepancy(p, n);
    EXPECT_GE(exact, grid - 1e-12);
    EXPECT_LE(exact, grid + 1.0 / static_cast<double>(n) + 1e-12);
  }
}

TEST(StarDiscrepancy, GridModeIsLowerBound) {
  Rng rng(4);
  for (int t = 0; t < 20; ++t) {
    const PointSet ps(random_points(rng, 1 + rng.index(8), 2));
    const auto exact = star_discrepancy(ps);
    const auto approx = star_discrepancy(ps, 1.0 / 64.0, true);
    EXPECT_EQ(approx.method, MetricMethod::grid_approx);
    EXPECT_LE(approx.value, exact.value + 1e-12);
  }
}

TEST(Distance, KnownValues) {
  EXPECT_EQ(distance_to_point(PointSet(Points{{0.2, 0.7}, {0.4, 0.4}}), {0.4, 0.4}), 0.0);
  EXPECT_EQ(distance_to_center(PointSet(Points{{0.0}})), 0.25);
  EXPECT_EQ(distance_to_origin(PointSet(Points{{1.0, 1.0}})), 2.0);
  EXPECT_THROW(distance_to_point(PointSet(Points{{0.5}}), {0.5, 0.5}), InvalidArgument);
}

TEST(Certificate, KnownValues) {
  EXPECT_EQ(optimization_error_certificate(0.0, 3.0), 0.0);
  EXPECT_NEAR(optimization_error_certificate(0.1, 2.0), 0.2, 1e-16);
  EXPECT_THROW(optimization_error_certificate(-0.1, 1.0), InvalidArgument);
}

TEST(Certificate, LipschitzFunctionOnLineGrid) {
  const Points p = grid_1d(11);
  double best = -INFINITY;
  for (const auto& x : p) best = std::max(best, 1.0 - std::abs(x[0] - 0.3));
  const double error = 1.0 - best;
  const double bound = optimization_error_certificate(dispersion(PointSet(p)).value, 1.0);
  EXPECT_NEAR(bound, 0.05, 1e-15);
  EXPECT_LE(error, bound + 1e-12);
}

// --- properties -------------------------------------------------------------

TEST(MetricsProperty, ExactMatchesGridOracle) {
  Rng rng(8);
  for (int t = 0; t < 30; ++t) {
    const std::size_t d = 1 + rng.index(2);
    const std::size_t n = d == 1 ? 20000 : 400;
    const Points p = random_points(rng, 1 + rng.index(8), d);
    const PointSet ps(p);
    const double disp = dispersion(ps).value;
    const double disp_grid = oracle::grid_dispersion(p, n);
    EXPECT_GE(disp, disp_grid - 1e-12);
    EXPECT_LE(disp, disp_grid + std::sqrt(static_cast<double>(d)) / (2.0 * n) + 1e-12);
    const double disc = star_discrepancy(ps).value;
    const double disc_grid = oracle::grid_star_discrepancy(p, n);
    EXPECT_GE(disc, disc_grid - 1e-12);
    EXPECT_LE(disc, disc_grid + static_cast<double>(d) / n + 1e-12);
  }
}

TEST(MetricsProperty, AddingPointsNeverHurts) {
  Rng rng(12);
  for (int t = 0; t < 200; ++t) {
    const std::size_t d = 1 + rng.index(3);
    Points p = random_points(rng, 1 + rng.index(10), d);
    const std::vector<double> ref = random_points(rng, 1, d)[0];
    const double disp = dispersion(PointSet(p), 1.0 / 16.0).value;
    const double dist = distance_to_point(PointSet(p), ref);
    p.push_back(random_points(rng, 1, d)[0]);
    EXPECT_LE(dispersion(PointSet(p), 1.0 / 16.0).value, disp + 1e-15);
    EXPECT_LE(distance_to_point(PointSet(p), ref), dist);
  }
}

TEST(MetricsProperty, RangesAndLowerBound) {
  Rng rng(13);
  for (int t = 0; t < 300; ++t) {
    const std::size_t d = 1 + rng.index(2);
    const std::size_t k = 1 + rng.index(30);
    const PointSet ps(random_points(rng, k, d));
    const auto r = compute_report(ps);
    EXPECT_GE(r.dispersion.value, r.lower_bound - 1e-9);
    EXPECT_GE(r.star_discrepancy.value, 0.0);
    EXPECT_LE(r.star_discrepancy.value, 1.0);
    EXPECT_GE(r.dist_to_center, 0.0);
    EXPECT_GE(r.dist_to_origin, 0.0);
  }
}

// Low discrepancy forces low dispersion. An empty ball of radius r holds a
// cube of side 2r/sqrt(d), so d^{-1/2} d_k <= D^{1/d} / 2 for the unanchored
// discrepancy D; with D <= 2^d D* this reads d^{-1/2} d_k <= D*^{1/d}.
TEST(MetricsProperty, DiscrepancyControlsDispersion) {
  Rng rng(14);
  for (int t = 0; t < 300; ++t) {
    const std::size_t d = 1 + rng.index(2);
    const PointSet ps(random_points(rng, 1 + rng.index(40), d));
    const double dd = static_cast<double>(d);
    EXPECT_LE(dispersion(ps).value / std::sqrt(dd),
              std::pow(star_discrepancy(ps).value, 1.0 / dd) + 1e-9);
  }
}

TEST(MetricsProperty, DiscrepancyBoundIsTightForMidpoint) {
  const PointSet ps(Points{{0.5}});
  EXPECT_EQ(dispersion(ps).value, star_discrepancy(ps).value);
}

TEST(Report, JsonShape) {
  const auto j = to_json(compute_report(PointSet(Points{{0.5, 0.5}})));
  EXPECT_EQ(j["k"], 1);
  EXPECT_EQ(j["d"], 2);
  EXPECT_EQ(j["dispersion"]["method"], "exact");
  EXPECT_EQ(j["star_discrepancy"]["method"], "exact");
  EXPECT_DOUBLE_EQ(j["dist_to_center"].get<double>(), 0.0);
  EXPECT_DOUBLE_EQ(j["dist_to_origin"].get<double>(), 0.5);
  EXPECT_NEAR(j["lower_bound"].get<double>(), 0.564190, 1e-6);
}
