#pragma once

#include <cstddef>
#include <span>

namespace dpmseq::bench {

/// Sum of squared differences between estimated and reference density values.
[[nodiscard]] double density_error(std::span<const double> fhat,
                                   std::span<const double> fref);

/// sum (f_method - f_ref)^2 / sum f_ref^2.  Throws when the reference is
/// identically zero.
[[nodiscard]] double relative_error(std::span<const double> fmethod,
                                    std::span<const double> fref);

/// Evaluates both densities at `points` and returns relative_error.
template <class F, class G>
[[nodiscard]] double relative_error(F&& fmethod, G&& fref,
                                    std::span<const double> points);

/// Fraction of positions with equal labels.
[[nodiscard]] double concordance(std::span<const int> a, std::span<const int> b);

} // namespace dpmseq::bench

#include <stdexcept>
#include <vector>

template <class F, class G>
double dpmseq::bench::relative_error(F&& fmethod, G&& fref,
                                     std::span<const double> points) {
  std::vector<double> m, r;
  m.reserve(points.size());
  r.reserve(points.size());
  for (double y : points) {
    m.push_back(fmethod(y));
    r.push_back(fref(y));
  }
  return relative_error(std::span<const double>(m), std::span<const double>(r));
}
