#pragma once

#include "dpmseq/nig.hpp"
#include "dpmseq/niw.hpp"
#include "dpmseq/types.hpp"

#include <concepts>
#include <cstddef>
#include <optional>
#include <vector>

namespace dpmseq {

/// Component parameter families the engines accept.
template <class P>
concept ConjugateFamily = requires(const P& p, Observation y, double w) {
  { dimension(p) } -> std::convertible_to<std::size_t>;
  { weighted_update(p, y, w) } -> std::same_as<P>;
  { log_predictive(p, y) } -> std::same_as<double>;
  { expected_loglik(p, y) } -> std::same_as<double>;
  { kl_divergence(p, p) } -> std::same_as<double>;
  { log_density(predictive_kernel(p), y) } -> std::same_as<double>;
  { posterior(p, empty_stats(p)) } -> std::same_as<P>;
  { log_marginal(p, empty_stats(p)) } -> std::same_as<double>;
};

template <ConjugateFamily P>
using KernelOf = decltype(predictive_kernel(std::declval<const P&>()));

template <ConjugateFamily P>
using StatsOf = decltype(empty_stats(std::declval<const P&>()));

/// Sequential fitting state shared by the engines.
///
/// `clusters` holds the labels opened so far, in order of appearance; every
/// label not yet opened is implicitly at `prior`.  `soft_counts` has the same
/// length and holds the expected occupancy of each label (integer-valued for
/// hard allocation).
template <ConjugateFamily P>
struct FitState {
  P prior;
  std::vector<P> clusters;
  std::vector<double> soft_counts;
  std::size_t processed = 0;
  double lower_bound = 0.0;
  double alpha = 1.0;
  std::optional<std::size_t> trunc;

  FitState(P base, double a, std::optional<std::size_t> t)
      : prior(std::move(base)), alpha(a), trunc(t) {}

  [[nodiscard]] std::size_t num_clusters() const noexcept {
    return clusters.size();
  }
  [[nodiscard]] double mass() const noexcept {
    double m = 0.0;
    for (double c : soft_counts) m += c;
    return m;
  }
};

} // namespace dpmseq
