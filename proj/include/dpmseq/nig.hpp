#pragma once

// Normal / inverse-gamma conjugate kernel for univariate normal components.
//
//   y | mu, zeta      ~ N(mu, 1/zeta)
//   mu | zeta         ~ N(rho, nu/zeta)
//   zeta              ~ Gamma(a, b)          (shape a, rate b)

#include "dpmseq/types.hpp"

#include <cmath>

namespace dpmseq {

struct NigParams {
  double rho = 0.0; ///< location of mu
  double nu = 1.0;  ///< variance of mu in units of 1/zeta
  double a = 1.0;   ///< gamma shape
  double b = 1.0;   ///< gamma rate

  /// Throws std::invalid_argument unless nu, a, b > 0 and all finite.
  void validate() const;

  friend bool operator==(const NigParams&, const NigParams&) = default;
};

/// Form of the rate update.  `Printed` reproduces the sign-flipped
/// rho^2/nu terms for diagnostics only; it is not a conjugate update.
enum class RateUpdate { Conjugate, Printed };

/// Weights below this are treated as exactly zero by the weighted updates.
inline constexpr double kMinUpdateWeight = 1e-12;

/// Posterior after raising the likelihood of `y` to the power `w` in [0, 1].
[[nodiscard]] NigParams nig_weighted_update(const NigParams& p, double y,
                                            double w,
                                            RateUpdate form = RateUpdate::Conjugate);

/// log t_{2a}(y; rho, b(nu+1)/a), the prior predictive of one observation.
[[nodiscard]] double nig_log_predictive(const NigParams& p, double y);
[[nodiscard]] double nig_predictive(const NigParams& p, double y);

/// E_q[log N(y | mu, 1/zeta)] under q = NIG(post).
[[nodiscard]] double nig_expected_loglik(const NigParams& post, double y);

/// KL(NIG(post) || NIG(prior)).
[[nodiscard]] double nig_kl(const NigParams& post, const NigParams& prior);

/// Weighted sufficient statistics of a set of observations.
struct NigStats {
  double n = 0.0;
  double sum = 0.0;
  double sumsq = 0.0;

  void add(double y, double w = 1.0) noexcept {
    n += w;
    sum += w * y;
    sumsq += w * y * y;
  }
  void remove(double y) noexcept { add(y, -1.0); }
};

/// Batch conjugate posterior of `prior` given the statistics.
[[nodiscard]] NigParams nig_posterior(const NigParams& prior,
                                      const NigStats& stats);

/// Closed-form log marginal likelihood of the observations summarised by
/// `stats` (unit weights) under `prior`.
[[nodiscard]] double nig_log_marginal(const NigParams& prior,
                                      const NigStats& stats);

/// Student-t kernel with precomputed normalizer, for repeated evaluation.
class NigPredictiveKernel {
public:
  explicit NigPredictiveKernel(const NigParams& p);
  [[nodiscard]] double log_density(double y) const noexcept {
    const double z = y - loc_;
    return log_norm_ - half_df_plus_one_ * std::log1p(z * z * inv_df_scale2_);
  }

private:
  double loc_;
  double log_norm_;
  double half_df_plus_one_;
  double inv_df_scale2_;
};

// Generic overloads used by the engine templates.

[[nodiscard]] inline std::size_t dimension(const NigParams&) { return 1; }
[[nodiscard]] NigParams weighted_update(const NigParams& p, Observation y,
                                        double w);
[[nodiscard]] double log_predictive(const NigParams& p, Observation y);
[[nodiscard]] double expected_loglik(const NigParams& post, Observation y);
[[nodiscard]] inline double kl_divergence(const NigParams& post,
                                          const NigParams& prior) {
  return nig_kl(post, prior);
}
[[nodiscard]] inline NigStats empty_stats(const NigParams&) { return {}; }
void add_observation(NigStats& s, Observation y, double w = 1.0);
[[nodiscard]] inline NigParams posterior(const NigParams& prior,
                                         const NigStats& s) {
  return nig_posterior(prior, s);
}
[[nodiscard]] inline double log_marginal(const NigParams& prior,
                                         const NigStats& s) {
  return nig_log_marginal(prior, s);
}
[[nodiscard]] inline NigPredictiveKernel predictive_kernel(const NigParams& p) {
  return NigPredictiveKernel(p);
}
[[nodiscard]] inline double log_density(const NigPredictiveKernel& k,
                                        Observation y) {
  return k.log_density(y[0]);
}

} // namespace dpmseq
