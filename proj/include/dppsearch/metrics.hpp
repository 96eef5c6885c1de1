#ifndef DPPSEARCH_METRICS_HPP
#define DPPSEARCH_METRICS_HPP

// Spread metrics of point sets in [0,1]^d: dispersion (largest empty ball),
// star discrepancy, squared distance to a reference point, and the
// dispersion-based optimization error certificate.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "dppsearch/errors.hpp"

namespace dppsearch {

class PointSet {
 public:
  PointSet(std::vector<std::vector<double>> points) : points_(std::move(points)) {
    if (points_.empty()) throw InvalidArgument("point set is empty");
    dim_ = points_.front().size();
    if (dim_ == 0) throw InvalidArgument("points must have at least one coordinate");
    for (const auto& p : points_) {
      if (p.size() != dim_) throw InvalidArgument("points differ in dimension");
      for (double x : p)
        if (!(x >= 0.0 && x <= 1.0))
          throw InvalidArgument("coordinate " + std::to_string(x) + " outside [0,1]");
    }
  }

  std::size_t size() const { return points_.size(); }
  std::size_t dim() const { return dim_; }
  const std::vector<double>& operator[](std::size_t i) const { return points_[i]; }
  const std::vector<std::vector<double>>& points() const { return points_; }

 private:
  std::vector<std::vector<double>> points_;
  std::size_t dim_ = 0;
};

enum class MetricMethod { exact, grid_approx };

inline std::string_view to_string(MetricMethod m) {
  return m == MetricMethod::exact ? "exact" : "grid-approx";
}

struct DispersionResult {
  double value = 0.0;
  MetricMethod method = MetricMethod::exact;
  double resolution = 0.0;   // grid spacing; 0 when exact
  double error_bound = 0.0;  // true value lies in [value, value + error_bound]
};

struct DiscrepancyResult {
  double value = 0.0;
  MetricMethod method = MetricMethod::exact;
  double resolution = 0.0;  // approximate mode reports a lower bound
};

inline double squared_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

namespace detail {

struct Vec2 {
  double x, y;
};

// Sutherland-Hodgman step: keep the part of a convex polygon with n.p <= c.
inline std::vector<Vec2> clip_halfplane(const std::vector<Vec2>& poly, Vec2 n, double c) {
  std::vector<Vec2> out;
  out.reserve(poly.size() + 1);
  const std::size_t m = poly.size();
  for (std::size_t i = 0; i < m; ++i) {
    const Vec2 a = poly[i];
    const Vec2 b = poly[(i + 1) % m];
    const double fa = n.x * a.x + n.y * a.y - c;
    const double fb = n.x * b.x + n.y * b.y - c;
    if (fa <= 0.0) out.push_back(a);
    if ((fa < 0.0 && fb > 0.0) || (fa > 0.0 && fb < 0.0)) {
      const double t = fa / (fa - fb);
      out.push_back({a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)});
    }
  }
  return out;
}

// Exact planar dispersion: every candidate maximizer (box corner, Voronoi
// vertex, bisector/boundary crossing) is a vertex of some site's Voronoi
// cell clipped to the unit square.
inline double dispersion_2d(const PointSet& ps) {
  const std::size_t k = ps.size();
  double best = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const Vec2 p{ps[i][0], ps[i][1]};
    std::vector<Vec2> cell = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    auto radius2 = [&] {
      double r = 0.0;
      for (const auto& v : cell)
        r = std::max(r, (v.x - p.x) * (v.x - p.x) + (v.y - p.y) * (v.y - p.y));
      return r;
    };
    double r2 = radius2();
    for (std::size_t j = 0; j < k && !cell.empty(); ++j) {
      if (j == i) continue;
      const Vec2 q{ps[j][0], ps[j][1]};
      const Vec2 n{q.x - p.x, q.y - p.y};
      const double dist2 = n.x * n.x + n.y * n.y;
      if (dist2 == 0.0) continue;     // coincident sites share a cell
      if (dist2 > 4.0 * r2) continue;  // bisector misses the current cell
      const double c = 0.5 * ((q.x * q.x + q.y * q.y) - (p.x * p.x + p.y * p.y));
      cell = clip_halfplane(cell, n, c);
      r2 = radius2();
    }
    best = std::max(best, r2);
  }
  return std::sqrt(best);
}

inline double dispersion_1d(const PointSet& ps) {
  std::vector<double> x;
  for (const auto& p : ps.points()) x.push_back(p[0]);
  std::sort(x.begin(), x.end());
  double best = std::max(x.front(), 1.0 - x.back());
  for (std::size_t i = 1; i < x.size(); ++i) best = std::max(best, 0.5 * (x[i] - x[i - 1]));
  return best;
}

inline std::size_t grid_steps(double resolution) {
  if (!(resolution > 0.0 && resolution <= 1.0))
    throw InvalidArgument("grid resolution must lie in (0, 1]");
  return static_cast<std::size_t>(std::llround(1.0 / resolution));
}

// Calls fn(u) for every point of the (steps+1)^d lattice on [0,1]^d.
template <typename Fn>
void for_each_lattice_point(std::size_t d, std::size_t steps, Fn&& fn) {
  std::vector<std::size_t> idx(d, 0);
  std::vector<double> u(d, 0.0);
  while (true) {
    for (std::size_t j = 0; j < d; ++j)
      u[j] = static_cast<double>(idx[j]) / static_cast<double>(steps);
    fn(u);
    std::size_t j = 0;
    while (j < d && ++idx[j] > steps) idx[j++] = 0;
    if (j == d) return;
  }
}

}  // namespace detail

/// Radius of the largest L2 ball centred in [0,1]^d that contains no point.
/// Exact for d <= 2; for d >= 3 the maximum over a lattice of spacing
/// `resolution`, with additive error bound resolution * sqrt(d) / 2.
inline DispersionResult dispersion(const PointSet& ps, double resolution = 1.0 / 64.0) {
  if (ps.dim() == 1) return {detail::dispersion_1d(ps), MetricMethod::exact, 0.0, 0.0};
  if (ps.dim() == 2) return {detail::dispersion_2d(ps), MetricMethod::exact, 0.0, 0.0};
  const std::size_t steps = detail::grid_steps(resolution);
  const double h = 1.0 / static_cast<double>(steps);
  double best = 0.0;
  detail::for_each_lattice_point(ps.dim(), steps, [&](const std::vector<double>& u) {
    double nearest = INFINITY;
    for (const auto& p : ps.points()) nearest = std::min(nearest, squared_distance(p, u));
    best = std::max(best, nearest);
  });
  return {std::sqrt(best), MetricMethod::grid_approx, h,
          h * std::sqrt(static_cast<double>(ps.dim())) / 2.0};
}

/// Lower bound on the dispersion of any k points in [0,1]^d:
/// Gamma(d/2+1)^{1/d} pi^{-1/2} k^{-1/d}.
inline double dispersion_lower_bound(std::size_t k, std::size_t d) {
  if (k == 0 || d == 0) throw InvalidArgument("k and d must be at least 1");
  const double dd = static_cast<double>(d);
  return std::pow(std::tgamma(dd / 2.0 + 1.0), 1.0 / dd) / std::sqrt(std::numbers::pi) *
         std::pow(static_cast<double>(k), -1.0 / dd);
}

namespace detail {

// |A(u) - vol(u)| for anchored half-open boxes [0,u), using both the count at
// u (points strictly below) and its right limit (points at or below, for axes
// with u_j < 1).
inline double local_discrepancy(const PointSet& ps, const std::vector<double>& u) {
  std::size_t open = 0, closed = 0;
  for (const auto& p : ps.points()) {
    bool in_open = true, in_closed = true;
    for (std::size_t j = 0; j < u.size(); ++j) {
      in_open = in_open && p[j] < u[j];
      in_closed = in_closed && (u[j] < 1.0 ? p[j] <= u[j] : p[j] < 1.0);
    }
    open += in_open;
    closed += in_closed;
  }
  double vol = 1.0;
  for (double x : u) vol *= x;
  const double k = static_cast<double>(ps.size());
  return std::max(std::abs(static_cast<double>(open) / k - vol),
                  std::abs(static_cast<double>(closed) / k - vol));
}

}  // namespace detail

/// Star discrepancy sup_u |A_k(x,u) - prod u_j| over boxes [0,u).
/// Exact (critical-coordinate enumeration) for d <= 2 unless `force_grid`;
/// otherwise a lower bound from a u-lattice of spacing `resolution`.
inline DiscrepancyResult star_discrepancy(const PointSet& ps, double resolution = 1.0 / 256.0,
                                          bool force_grid = false) {
  const std::size_t d = ps.dim();
  if (d <= 2 && !force_grid) {
    std::vector<std::vector<double>> critical(d);
    for (std::size_t j = 0; j < d; ++j) {
      auto& c = critical[j];
      c = {0.0, 1.0};
      for (const auto& p : ps.points()) c.push_back(p[j]);
      std::sort(c.begin(), c.end());
      c.erase(std::unique(c.begin(), c.end()), c.end());
    }
    double best = 0.0;
    std::vector<double> u(d);
    if (d == 1) {
      for (double a : critical[0]) {
        u[0] = a;
        best = std::max(best, detail::local_discrepancy(ps, u));
      }
    } else {
      for (double a : critical[0])
        for (double b : critical[1]) {
          u[0] = a;
          u[1] = b;
          best = std::max(best, detail::local_discrepancy(ps, u));
        }
    }
    return {best, MetricMethod::exact, 0.0};
  }
  const std::size_t steps = detail::grid_steps(resolution);
  double best = 0.0;
  detail::for_each_lattice_point(d, steps, [&](const std::vector<double>& u) {
    best = std::max(best, detail::local_discrepancy(ps, u));
  });
  return {best, MetricMethod::grid_approx, 1.0 / static_cast<double>(steps)};
}

/// min_i ||x_i - ref||_2^2.
inline double distance_to_point(const PointSet& ps, const std::vector<double>& ref) {
  if (ref.size() != ps.dim()) throw InvalidArgument("reference point has the wrong dimension");
  double best = INFINITY;
  for (const auto& p : ps.points()) best = std::min(best, squared_distance(p, ref));
  return best;
}

inline double distance_to_center(const PointSet& ps) {
  return distance_to_point(ps, std::vector<double>(ps.dim(), 0.5));
}

inline double distance_to_origin(const PointSet& ps) {
  return distance_to_point(ps, std::vector<double>(ps.dim(), 0.0));
}

/// Bound on m(f) - m_k(f; x) for an L-Lipschitz objective: L * dispersion.
inline double optimization_error_certificate(double dispersion, double lipschitz) {
  if (!(dispersion >= 0.0) || !(lipschitz >= 0.0))
    throw InvalidArgument("dispersion and Lipschitz constant must be nonnegative");
  return lipschitz * dispersion;
}

struct MetricOptions {
  double dispersion_resolution = 1.0 / 64.0;
  double discrepancy_resolution = 1.0 / 256.0;
};

struct MetricReport {
  DispersionResult dispersion;
  DiscrepancyResult star_discrepancy;
  double dist_to_center = 0.0;
  double dist_to_origin = 0.0;
  double lower_bound = 0.0;
  std::size_t k = 0;
  std::size_t d = 0;
};

inline MetricReport compute_report(const PointSet& ps, const MetricOptions& opt = {}) {
  MetricReport r;
  r.k = ps.size();
  r.d = ps.dim();
  r.dispersion = dispersion(ps, opt.dispersion_resolution);
  r.star_discrepancy = star_discrepancy(ps, opt.discrepancy_resolution);
  r.dist_to_center = distance_to_center(ps);
  r.dist_to_origin = distance_to_origin(ps);
  r.lower_bound = dispersion_lower_bound(r.k, r.d);
  return r;
}

inline nlohmann::ordered_json to_json(const MetricReport& r) {
  nlohmann::ordered_json j;
  j["k"] = r.k;
  j["d"] = r.d;
  j["dispersion"] = {{"value", r.dispersion.value},
                     {"method", to_string(r.dispersion.method)},
                     {"resolution", r.dispersion.resolution},
                     {"error_bound", r.dispersion.error_bound}};
  j["star_discrepancy"] = {{"value", r.star_discrepancy.value},
                           {"method", to_string(r.star_discrepancy.method)},
                           {"resolution", r.star_discrepancy.resolution}};
  j["dist_to_center"] = r.dist_to_center;
  j["dist_to_origin"] = r.dist_to_origin;
  j["lower_bound"] = r.lower_bound;
  return j;
}

}  // namespace dppsearch

#endif  // DPPSEARCH_METRICS_HPP
