#ifndef DPPSEARCH_SOBOL_HPP
#define DPPSEARCH_SOBOL_HPP

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "dppsearch/errors.hpp"
#include "dppsearch/sobol_table.hpp"

namespace dppsearch {

/// Unscrambled Sobol sequence with Joe-Kuo direction numbers; point 0 is the
/// origin. Points are exact dyadic rationals with 32 bits.
class SobolSequence {
 public:
  static constexpr int kBits = 32;

  explicit SobolSequence(std::size_t dims) : directions_(dims) {
    if (dims == 0) throw InvalidArgument("sobol: dimension must be at least 1");
    if (dims > detail::kSobolMaxDim)
      throw UnsupportedSpace("sobol: dimension " + std::to_string(dims) +
                             " exceeds the direction-number table (" +
                             std::to_string(detail::kSobolMaxDim) + ")");
    for (std::size_t d = 0; d < dims; ++d) {
      auto& v = directions_[d];
      const auto& row = detail::kSobolTable[d];
      const std::uint32_t poly = row.poly;
      const int degree = std::bit_width(poly) - 1;
      if (degree == 0) {
        for (int j = 0; j < kBits; ++j) v[j] = 1;
      } else {
        for (int j = 0; j < degree; ++j) v[j] = row.m[j];
        for (int j = degree; j < kBits; ++j) {
          std::uint32_t next = v[j - degree];
          std::uint32_t pow2 = 1;
          for (int t = 0; t < degree; ++t) {
            pow2 <<= 1;
            if ((poly >> (degree - 1 - t)) & 1u) next ^= pow2 * v[j - t - 1];
          }
          v[j] = next;
        }
      }
      for (int j = 0; j < kBits; ++j) v[j] <<= (kBits - 1 - j);
    }
  }

  std::size_t dims() const { return directions_.size(); }

  /// The n-th point (0-based), via the Gray-code representation of n.
  std::vector<double> point(std::uint64_t n) const {
    if (n >> kBits) throw InvalidArgument("sobol: index exceeds 2^32");
    const std::uint64_t gray = n ^ (n >> 1);
    std::vector<double> x(dims());
    for (std::size_t d = 0; d < dims(); ++d) {
      std::uint32_t acc = 0;
      for (int j = 0; j < kBits; ++j)
        if ((gray >> j) & 1u) acc ^= directions_[d][j];
      x[d] = std::ldexp(static_cast<double>(acc), -kBits);
    }
    return x;
  }

 private:
  std::vector<std::array<std::uint32_t, kBits>> directions_;
};

/// Cranley-Patterson rotation: x + shift (mod 1), per coordinate.
inline std::vector<double> rotate(std::vector<double> x, const std::vector<double>& shift) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    double y = x[i] + shift[i];
    if (y >= 1.0) y -= 1.0;
    x[i] = y;
  }
  return x;
}

}  // namespace dppsearch

#endif  // DPPSEARCH_SOBOL_HPP
