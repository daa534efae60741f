#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>

namespace dpmseq::detail {

inline double log_sum_exp(std::span<const double> xs) {
  if (xs.empty()) return -std::numeric_limits<double>::infinity();
  const double m = *std::max_element(xs.begin(), xs.end());
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

} // namespace dpmseq::detail
