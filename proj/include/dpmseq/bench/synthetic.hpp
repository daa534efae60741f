#pragma once

// Three-component normal mixture used for the density-estimation study:
//   0.4 N(-dmu, s1) + 0.3 N(0, s2) + 0.3 N(dmu, s3),  (s1, s2, s3) = (0.25, 0.5, 2).

#include "dpmseq/types.hpp"

#include <array>
#include <cstddef>
#include <cstdint>

namespace dpmseq::bench {

/// How the second parameter of each mixture component is read.
enum class ScaleConvention { Variance, StdDev };

struct SyntheticSpec {
  double dmu = 0.0;
  std::size_t n = 500;
  std::uint64_t seed = 0;
  ScaleConvention scale = ScaleConvention::Variance;

  void validate() const;
  /// True when dmu lies in [0, 5].
  [[nodiscard]] bool in_reference_range() const noexcept {
    return dmu >= 0.0 && dmu <= 5.0;
  }
};

struct MixtureComponent {
  double weight;
  double mean;
  double variance;
};

[[nodiscard]] std::array<MixtureComponent, 3> mixture_components(
    double dmu, ScaleConvention scale = ScaleConvention::Variance);

/// n i.i.d. draws; labels hold the generating component (0, 1, 2).
[[nodiscard]] Dataset gen_mixture(const SyntheticSpec& spec);

[[nodiscard]] double true_density(
    double dmu, double y, ScaleConvention scale = ScaleConvention::Variance);

[[nodiscard]] double mixture_mean(double dmu, ScaleConvention scale =
                                                  ScaleConvention::Variance);
[[nodiscard]] double mixture_variance(
    double dmu, ScaleConvention scale = ScaleConvention::Variance);

/// Deterministic 64-bit stream key derived from a master seed and indices.
[[nodiscard]] std::uint64_t stream_seed(std::uint64_t master, std::uint64_t a,
                                        std::uint64_t b = 0) noexcept;

} // namespace dpmseq::bench
