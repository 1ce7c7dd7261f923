#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "dtfdd/rng.hpp"

namespace testutil {

/// Kolmogorov-Smirnov distance between the sample's empirical CDF and `cdf`.
inline double ks_statistic(std::vector<double> xs, const std::function<double(double)>& cdf) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

inline dtfdd::Rng rng(std::uint64_t seed) { return dtfdd::Rng(seed); }

inline double uniform(dtfdd::Rng& r, double lo = 0.0, double hi = 1.0) {
  return std::uniform_real_distribution<double>(lo, hi)(r);
}

}  // namespace testutil
