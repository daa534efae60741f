#pragma once

// Polya-urn allocation priors for the Dirichlet process and its truncation.
//
// Step indices are one-based: `step` = i means the weights for observation i
// given the allocations of observations 1..i-1.  Labels are zero-based and in
// order of first appearance, so the returned vector's last entry (when
// present) is the "new cluster" slot.

#include "dpmseq/types.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace dpmseq {

/// Expected cluster occupancies: entry j is the sum of past allocation
/// probabilities on label j.
struct ClusterSoftCounts {
  std::vector<double> counts;

  [[nodiscard]] double total() const noexcept;
  [[nodiscard]] std::size_t size() const noexcept { return counts.size(); }
};

/// Untruncated Polya urn: [n_j/(alpha+i-1)]_j followed by alpha/(alpha+i-1).
AllocationDistribution urn_prior(std::span<const std::size_t> hard_counts,
                                 double alpha, std::size_t step);

/// Truncated urn with at most `trunc` components.  The new-cluster slot is
/// appended only while fewer than `trunc` labels are occupied.
AllocationDistribution truncated_urn_prior(
    std::span<const std::size_t> hard_counts, double alpha, std::size_t trunc,
    std::size_t step);

/// Expected truncated-urn weights under soft allocations.  The number of
/// opened labels is soft_counts.size(); with indicator-valued counts this is
/// exactly truncated_urn_prior, and with the counts accumulated by soft
/// allocation it is the (i-1)^T form.  Throws when the counts do not total
/// step-1 (tolerance 1e-9 relative).
AllocationDistribution soft_urn_weights(std::span<const double> soft_counts,
                                        double alpha, std::size_t trunc,
                                        std::size_t step);

namespace detail {

/// Unchecked log-space weights shared by the engines.  `mass` is the total
/// of `counts` (the number of previously processed observations, possibly
/// fractional).  An empty `trunc` means the untruncated urn.  Writes
/// counts.size() entries plus the new-cluster slot when it has positive
/// mass, and returns the number written.
std::size_t log_urn_weights(std::span<const double> counts, double alpha,
                            std::optional<std::size_t> trunc, double mass,
                            std::vector<double>& out);

} // namespace detail

} // namespace dpmseq
