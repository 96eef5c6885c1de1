#ifndef DPPSEARCH_DPPSEARCH_HPP
#define DPPSEARCH_DPPSEARCH_HPP

#include "dppsearch/errors.hpp"
#include "dppsearch/harness.hpp"
#include "dppsearch/kernel.hpp"
#include "dppsearch/metrics.hpp"
#include "dppsearch/parallel.hpp"
#include "dppsearch/rng.hpp"
#include "dppsearch/samplers.hpp"
#include "dppsearch/searchspace.hpp"
#include "dppsearch/sobol.hpp"

namespace dppsearch {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace dppsearch

#endif  // DPPSEARCH_DPPSEARCH_HPP
