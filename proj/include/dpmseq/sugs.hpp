#pragma once

// Sequential updating and greedy search: each observation is assigned to the
// cluster with the largest approximate posterior allocation probability and
// that assignment is frozen.

#include "dpmseq/conjugate.hpp"
#include "dpmseq/types.hpp"

#include <cstddef>
#include <optional>
#include <vector>

namespace dpmseq {

struct SugsOptions {
  double alpha = 1.0;
  /// Empty for the untruncated urn; otherwise at most this many clusters.
  std::optional<std::size_t> truncation;
};

template <ConjugateFamily P>
class SugsFit {
public:
  SugsFit(P prior, const SugsOptions& opts);

  FitState<P> state;
  /// Zero-based labels in order of first appearance.
  std::vector<std::size_t> allocations;
  /// Sum of log predictive densities of each observation under the cluster
  /// it was assigned to, at assignment time.
  double log_pseudo_marginal = 0.0;

  [[nodiscard]] const KernelOf<P>& kernel(std::size_t j) const {
    return kernels_[j];
  }
  [[nodiscard]] const KernelOf<P>& prior_kernel() const { return prior_kernel_; }

private:
  template <ConjugateFamily Q>
  friend void sugs_step(SugsFit<Q>& fit, Observation y);

  KernelOf<P> prior_kernel_;
  std::vector<KernelOf<P>> kernels_;
};

/// Processes one observation: argmax allocation (ties to the smallest
/// label), unit-weight update of the chosen cluster only.
template <ConjugateFamily P>
void sugs_step(SugsFit<P>& fit, Observation y);

/// Folds sugs_step over the rows of `data` in order.
template <ConjugateFamily P>
[[nodiscard]] SugsFit<P> sugs_fit(const Dataset& data, const P& prior,
                                  const SugsOptions& opts);

/// log p(y_{1:N} | allocations), accumulated by the chain rule.
template <ConjugateFamily P>
[[nodiscard]] double pseudo_marginal(const SugsFit<P>& fit) {
  return fit.log_pseudo_marginal;
}

/// Predictive density of the next observation: urn weights at step N+1 over
/// the fitted clusters plus the new-cluster slot at the prior.
template <ConjugateFamily P>
[[nodiscard]] double log_predictive_density(const SugsFit<P>& fit,
                                            Observation y);
template <ConjugateFamily P>
[[nodiscard]] double predictive_density(const SugsFit<P>& fit, Observation y);

extern template class SugsFit<NigParams>;
extern template class SugsFit<NiwParams>;
extern template void sugs_step(SugsFit<NigParams>&, Observation);
extern template void sugs_step(SugsFit<NiwParams>&, Observation);
extern template SugsFit<NigParams> sugs_fit(const Dataset&, const NigParams&,
                                            const SugsOptions&);
extern template SugsFit<NiwParams> sugs_fit(const Dataset&, const NiwParams&,
                                            const SugsOptions&);
extern template double log_predictive_density(const SugsFit<NigParams>&,
                                              Observation);
extern template double log_predictive_density(const SugsFit<NiwParams>&,
                                              Observation);
extern template double predictive_density(const SugsFit<NigParams>&,
                                          Observation);
extern template double predictive_density(const SugsFit<NiwParams>&,
                                          Observation);

} // namespace dpmseq
