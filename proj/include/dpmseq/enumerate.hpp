#pragma once

// Brute-force posterior for tiny datasets: sums over every label string with
// labels introduced in order of appearance (at most `trunc` distinct labels
// when truncated).

#include "dpmseq/conjugate.hpp"
#include "dpmseq/types.hpp"

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

namespace dpmseq {

inline constexpr std::size_t kMaxEnumerationSize = 10;

template <ConjugateFamily P>
struct ExactPosterior {
  double log_marginal = 0.0;
  /// Canonical label string -> posterior probability.
  std::map<std::vector<std::uint32_t>, double> partition_posterior;

  /// Exact posterior predictive density of observation N+1.
  [[nodiscard]] double predictive(Observation y) const;

  struct Term {
    double probability;
    std::vector<double> log_weights;
    std::vector<KernelOf<P>> kernels;
  };
  std::vector<Term> terms;
};

/// Throws std::invalid_argument when data.size() exceeds
/// kMaxEnumerationSize or is zero.
template <ConjugateFamily P>
[[nodiscard]] ExactPosterior<P> enumerate_exact(
    const Dataset& data, const P& prior, double alpha,
    std::optional<std::size_t> trunc);

extern template struct ExactPosterior<NigParams>;
extern template struct ExactPosterior<NiwParams>;
extern template ExactPosterior<NigParams> enumerate_exact(
    const Dataset&, const NigParams&, double, std::optional<std::size_t>);
extern template ExactPosterior<NiwParams> enumerate_exact(
    const Dataset&, const NiwParams&, double, std::optional<std::size_t>);

} // namespace dpmseq
