#ifndef DPPSEARCH_KERNEL_HPP
#define DPPSEARCH_KERNEL_HPP

// RBF similarity, L-ensemble principal minors, log-determinants and GP
// posterior variance. Everything here is a pure function of its inputs.

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "dppsearch/errors.hpp"
#include "dppsearch/searchspace.hpp"

namespace dppsearch {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// Smallest Cholesky pivot treated as nonzero.
inline constexpr double kMinPivot = 1e-300;

struct KernelConfig {
  double sigma = 1.0;
  double jitter = 1e-10;

  /// sigma = sqrt(2)/k, the budget-dependent default bandwidth.
  static KernelConfig for_budget(std::size_t k, double jitter = 1e-10) {
    return {std::sqrt(2.0) / static_cast<double>(k), jitter};
  }

  void validate() const {
    if (!(sigma > 0.0) || !std::isfinite(sigma))
      throw InvalidArgument("kernel sigma must be positive");
    if (!(jitter >= 0.0) || jitter > 1e-6)
      throw InvalidArgument("kernel jitter must lie in [0, 1e-6]");
  }
};

inline double rbf(const FeatureVector& a, const FeatureVector& b, const KernelConfig& cfg) {
  if (a.size() != b.size())
    throw InvalidArgument("rbf: feature vectors differ in length");
  return std::exp(-(a - b).squaredNorm() / (2.0 * cfg.sigma * cfg.sigma));
}

/// L restricted to a chosen subset: a symmetric PSD k x k matrix.
class PrincipalMinor {
 public:
  PrincipalMinor() = default;
  explicit PrincipalMinor(Eigen::MatrixXd entries) : entries_(std::move(entries)) {}

  const Eigen::MatrixXd& entries() const { return entries_; }
  Eigen::Index size() const { return entries_.rows(); }
  double operator()(Eigen::Index i, Eigen::Index j) const { return entries_(i, j); }

 private:
  Eigen::MatrixXd entries_;
};

/// L_ij = q_i q_j K(phi_i, phi_j) + jitter * [i == j] over precomputed features.
inline PrincipalMinor build_L(std::span<const FeatureVector> features,
                              std::span<const double> qualities, const KernelConfig& cfg) {
  cfg.validate();
  if (features.empty()) throw InvalidArgument("build_L: empty point list");
  const auto n = static_cast<Eigen::Index>(features.size());
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    m(i, i) = qualities[i] * qualities[i] + cfg.jitter;
    for (Eigen::Index j = 0; j < i; ++j) {
      const double v = qualities[i] * qualities[j] * rbf(features[i], features[j], cfg);
      m(i, j) = v;
      m(j, i) = v;
    }
  }
  return PrincipalMinor(std::move(m));
}

inline PrincipalMinor build_L(std::span<const Configuration> points, const SearchSpace& space,
                              const KernelConfig& cfg) {
  std::vector<FeatureVector> phi;
  std::vector<double> q;
  phi.reserve(points.size());
  for (const auto& p : points) {
    phi.push_back(encode(space, p));
    q.push_back(quality(p));
  }
  return build_L(phi, q, cfg);
}

namespace detail {

// Cholesky recurrences shared by logdet and PosteriorVariance so that both
// round identically and the chain rule holds to the last bit of each pivot.
template <typename A, typename B>
double cholesky_offdiag(double m_ij, const A& row_i, const B& row_j, std::size_t j) {
  double s = m_ij;
  for (std::size_t t = 0; t < j; ++t) s -= row_i[t] * row_j[t];
  return s / row_j[j];
}

template <typename A>
double cholesky_explained(const A& row, std::size_t n) {
  double e = 0.0;
  for (std::size_t t = 0; t < n; ++t) e += row[t] * row[t];
  return e;
}

}  // namespace detail

/// log det via an unpivoted Cholesky sweep; kNegInf once a pivot drops
/// below kMinPivot. Throws on asymmetric input.
inline double logdet(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) throw InvalidArgument("logdet: matrix is not square");
  const Eigen::Index n = m.rows();
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < i; ++j)
      if (std::abs(m(i, j) - m(j, i)) > 1e-12)
        throw InvalidArgument("logdet: matrix is not symmetric");
  const auto N = static_cast<std::size_t>(n);
  thread_local std::vector<double> buf;
  buf.assign(N * N, 0.0);
  double sum = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    double* li = buf.data() + i * N;
    for (std::size_t j = 0; j < i; ++j)
      li[j] = detail::cholesky_offdiag(m(ii, static_cast<Eigen::Index>(j)), li, buf.data() + j * N, j);
    const double d = m(ii, ii) - detail::cholesky_explained(li, i);
    if (!(d >= kMinPivot)) return kNegInf;
    li[i] = std::sqrt(d);
    sum += std::log(d);
  }
  return sum;
}

inline double logdet(const PrincipalMinor& m) { return logdet(m.entries()); }

/// Metropolis acceptance for a swap move, 1/2 min(1, det'/det), in log space.
/// A singular proposal is never accepted from a regular state. From a singular
/// state the ratio is taken as infinite (or 1 when both are singular), so the
/// probability is 1/2 either way.
inline double acceptance_probability(double logdet_current, double logdet_proposed) {
  if (logdet_current == kNegInf) return 0.5;
  if (logdet_proposed == kNegInf) return 0.0;
  const double diff = logdet_proposed - logdet_current;
  return diff >= 0.0 ? 0.5 : 0.5 * std::exp(diff);
}

/// Incremental GP posterior-variance state: holds the Cholesky factor of the
/// (jittered) kernel matrix of the selected points and grows it one row at a
/// time. Adding points in the same order always yields the same factor bits.
class PosteriorVariance {
 public:
  explicit PosteriorVariance(KernelConfig cfg) : cfg_(cfg) { cfg_.validate(); }

  std::size_t size() const { return points_.size(); }

  /// Prior variance q^2 minus the explained part; clamped at zero.
  double variance(const FeatureVector& x, double q = 1.0) const {
    if (points_.empty()) return q * q;
    std::vector<double> y = solve(x, q);
    return std::max(0.0, q * q - detail::cholesky_explained(y, y.size()));
  }

  /// Appends a selected point. Throws DegenerateError if the jittered kernel
  /// matrix becomes numerically singular.
  void add(const FeatureVector& x, double q = 1.0) {
    std::vector<double> y = solve(x, q);
    const double pivot = q * q + cfg_.jitter - detail::cholesky_explained(y, y.size());
    if (!(pivot >= kMinPivot))
      throw DegenerateError("selected set is degenerate: kernel matrix is singular");
    y.push_back(std::sqrt(pivot));
    rows_.push_back(std::move(y));
    points_.push_back(x);
    qualities_.push_back(q);
  }

 private:
  // Forward substitution L y = k_x where k_x is the cross-kernel vector.
  std::vector<double> solve(const FeatureVector& x, double q) const {
    const std::size_t n = points_.size();
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i)
      y[i] = detail::cholesky_offdiag(q * qualities_[i] * rbf(x, points_[i], cfg_), y, rows_[i], i);
    return y;
  }

  KernelConfig cfg_;
  std::vector<FeatureVector> points_;
  std::vector<double> qualities_;
  std::vector<std::vector<double>> rows_;  // lower-triangular Cholesky rows
};

/// K(x,x) - k_x^T K_S^{-1} k_x, with K_S jittered; 1 for an empty selection.
inline double posterior_variance(const Configuration& candidate,
                                 std::span<const Configuration> selected,
                                 const SearchSpace& space, const KernelConfig& cfg) {
  PosteriorVariance state(cfg);
  for (const auto& s : selected) state.add(encode(space, s), quality(s));
  return state.variance(encode(space, candidate), quality(candidate));
}

}  // namespace dppsearch

#endif  // DPPSEARCH_KERNEL_HPP
