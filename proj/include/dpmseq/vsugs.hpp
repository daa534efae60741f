#pragma once

// Variational SUGS: each observation keeps a probability distribution over
// its cluster label and every cluster receives a fractionally weighted
// conjugate update.  A per-step variational lower bound is accumulated for
// ordering selection.
//
// Labels are opened in order of appearance.  In soft mode the new-cluster
// slot is opened whenever it is offered, so after i steps exactly min(i, T)
// labels are open.  In hard mode (indicator allocations) a label is opened
// only when chosen, which reproduces truncated SUGS step for step.

#include "dpmseq/conjugate.hpp"
#include "dpmseq/types.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace dpmseq {

enum class AllocationMode { Soft, Hard };

/// `Printed` evaluates the bound exactly as typeset: the parameter-change
/// block enters with a plus sign and the expected precision is b/a.  It is
/// kept for diagnostics and only available for NigParams.
enum class BoundForm { Corrected, Printed };

struct VsugsOptions {
  double alpha = 1.0;
  std::size_t trunc = 1;
  AllocationMode mode = AllocationMode::Soft;
  BoundForm bound = BoundForm::Corrected;
  RateUpdate rate_update = RateUpdate::Conjugate; // NigParams only
  bool keep_allocations = true;

  void validate() const;
};

template <ConjugateFamily P>
class VsugsFit {
public:
  VsugsFit(P prior, const VsugsOptions& opts);

  FitState<P> state;
  /// One distribution per processed observation (empty when
  /// keep_allocations is off).
  std::vector<AllocationDistribution> allocations;
  VsugsOptions options;

  [[nodiscard]] const KernelOf<P>& kernel(std::size_t j) const {
    return kernels_[j];
  }
  [[nodiscard]] const KernelOf<P>& prior_kernel() const { return prior_kernel_; }

private:
  template <ConjugateFamily Q>
  friend AllocationDistribution vsugs_step(VsugsFit<Q>& fit, Observation y,
                                           double weight);

  KernelOf<P> prior_kernel_;
  std::vector<KernelOf<P>> kernels_;
  std::vector<double> log_urn_;
  std::vector<double> log_score_;
  double mass_ = 0.0;

public:
  /// Total observation weight absorbed so far.
  [[nodiscard]] double mass() const noexcept { return mass_; }
};

/// Soft allocation of `y` given the state after i-1 observations:
/// q(j) proportional to the expected urn weight times the cluster predictive.
template <ConjugateFamily P>
[[nodiscard]] AllocationDistribution vsugs_allocate(const FitState<P>& state,
                                                    Observation y);

/// Processes one observation and returns the allocation it received.  With
/// `weight` < 1 the observation counts fractionally: every cluster update
/// and soft count uses weight * q(j).
template <ConjugateFamily P>
AllocationDistribution vsugs_step(VsugsFit<P>& fit, Observation y,
                                  double weight = 1.0);

/// Variational lower bound contribution of one step: expected
/// log-likelihood, minus KL of each updated cluster from its previous
/// state, plus the allocation entropy and cross term.  Entries with zero
/// allocation probability contribute nothing to the last three terms.
template <ConjugateFamily P>
[[nodiscard]] double step_lower_bound(std::span<const P> prev,
                                      std::span<const P> next,
                                      const AllocationDistribution& qhat,
                                      const AllocationDistribution& qij,
                                      Observation y,
                                      BoundForm form = BoundForm::Corrected);

template <ConjugateFamily P>
[[nodiscard]] VsugsFit<P> vsugs_fit(const Dataset& data, const P& prior,
                                    const VsugsOptions& opts);

/// Mixture of cluster predictives with the expected urn weights at step N+1
/// (the new-cluster slot, while open, uses the prior predictive).
template <ConjugateFamily P>
[[nodiscard]] double log_predictive_density(const VsugsFit<P>& fit,
                                            Observation y);
template <ConjugateFamily P>
[[nodiscard]] double predictive_density(const VsugsFit<P>& fit, Observation y);

#define DPMSEQ_VSUGS_EXTERN(P)                                                 \
  extern template class VsugsFit<P>;                                           \
  extern template AllocationDistribution vsugs_allocate(const FitState<P>&,    \
                                                        Observation);          \
  extern template AllocationDistribution vsugs_step(VsugsFit<P>&, Observation,  \
                                                    double);                   \
  extern template double step_lower_bound(std::span<const P>,                  \
                                          std::span<const P>,                  \
                                          const AllocationDistribution&,       \
                                          const AllocationDistribution&,       \
                                          Observation, BoundForm);             \
  extern template VsugsFit<P> vsugs_fit(const Dataset&, const P&,              \
                                        const VsugsOptions&);                  \
  extern template double log_predictive_density(const VsugsFit<P>&,            \
                                                Observation);                  \
  extern template double predictive_density(const VsugsFit<P>&, Observation);

DPMSEQ_VSUGS_EXTERN(NigParams)
DPMSEQ_VSUGS_EXTERN(NiwParams)
#undef DPMSEQ_VSUGS_EXTERN

} // namespace dpmseq
