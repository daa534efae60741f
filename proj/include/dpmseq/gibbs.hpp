#pragma once

// Collapsed Gibbs sampler for the (optionally truncated) DP mixture.  The
// component parameters are integrated out; each sweep resamples every
// allocation from its full conditional.

#include "dpmseq/conjugate.hpp"
#include "dpmseq/types.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

namespace dpmseq {

struct GibbsConfig {
  std::size_t burnin = 300;
  std::size_t iters = 1000; ///< retained draws
  std::size_t thin = 1;     ///< sweeps per retained draw
  std::uint64_t seed = 1;

  void validate() const;
};

struct PosteriorSamples {
  /// One row per retained draw, labels relabeled in order of appearance.
  std::vector<std::vector<std::uint32_t>> allocation_draws;
  std::vector<std::size_t> cluster_count_draws;

  [[nodiscard]] std::size_t num_draws() const noexcept {
    return allocation_draws.size();
  }
};

/// Relabels a label vector so labels appear as 0, 1, 2, ... in order.
[[nodiscard]] std::vector<std::uint32_t> canonical_labels(
    std::span<const std::uint32_t> labels);

template <ConjugateFamily P>
[[nodiscard]] PosteriorSamples collapsed_gibbs(
    const Dataset& data, const P& prior, double alpha,
    std::optional<std::size_t> trunc, const GibbsConfig& cfg);

/// Rao-Blackwellized predictive density: for each draw, the urn weights at
/// step N+1 times the cluster posterior predictives (plus the new-cluster
/// slot at the prior), averaged over draws.
template <ConjugateFamily P>
class GibbsPredictive {
public:
  GibbsPredictive(const PosteriorSamples& samples, const Dataset& data,
                  const P& prior, double alpha,
                  std::optional<std::size_t> trunc);

  [[nodiscard]] double density(Observation y) const;
  /// Per-draw predictive values, for Monte Carlo error estimates.
  [[nodiscard]] std::vector<double> draw_densities(Observation y) const;
  [[nodiscard]] std::size_t num_draws() const noexcept { return draws_.size(); }

private:
  struct Draw {
    std::vector<double> log_weights;
    std::vector<KernelOf<P>> kernels;
  };
  [[nodiscard]] double draw_density(const Draw& d, Observation y) const;

  std::vector<Draw> draws_;
};

template <ConjugateFamily P>
[[nodiscard]] double gibbs_predictive(const PosteriorSamples& samples,
                                      const Dataset& data, const P& prior,
                                      double alpha,
                                      std::optional<std::size_t> trunc,
                                      Observation y) {
  return GibbsPredictive<P>(samples, data, prior, alpha, trunc).density(y);
}

extern template PosteriorSamples collapsed_gibbs(const Dataset&,
                                                 const NigParams&, double,
                                                 std::optional<std::size_t>,
                                                 const GibbsConfig&);
extern template PosteriorSamples collapsed_gibbs(const Dataset&,
                                                 const NiwParams&, double,
                                                 std::optional<std::size_t>,
                                                 const GibbsConfig&);
extern template class GibbsPredictive<NigParams>;
extern template class GibbsPredictive<NiwParams>;

} // namespace dpmseq
