#pragma once

// Normal / inverse-Wishart conjugate kernel for d-dimensional normal
// components.
//
//   y | mu, Sigma   ~ N(mu, Sigma)
//   mu | Sigma      ~ N(mean, Sigma / kappa)
//   Sigma           ~ IW(psi, df)
//
// With d = 1 this is the NIG kernel under kappa = 1/nu, df = 2a, psi = 2b.

#include "dpmseq/types.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Core>

namespace dpmseq {

class NiwParams {
public:
  /// Validates kappa > 0, df > d - 1 and psi symmetric positive-definite.
  NiwParams(Eigen::VectorXd mean, double kappa, Eigen::MatrixXd psi,
            double df);

  [[nodiscard]] const Eigen::VectorXd& mean() const noexcept { return mean_; }
  [[nodiscard]] double kappa() const noexcept { return kappa_; }
  [[nodiscard]] const Eigen::MatrixXd& psi() const noexcept { return psi_; }
  [[nodiscard]] double df() const noexcept { return df_; }
  [[nodiscard]] std::size_t dim() const noexcept {
    return static_cast<std::size_t>(mean_.size());
  }

  /// Lower Cholesky factor of psi, maintained under rank-one updates.
  [[nodiscard]] Eigen::MatrixXd psi_chol() const { return chol_.matrixL(); }
  [[nodiscard]] const Eigen::LLT<Eigen::MatrixXd>& psi_llt() const noexcept {
    return chol_;
  }
  [[nodiscard]] double log_det_psi() const noexcept;

  /// d-dimensional NIW equivalent to an NIG prior replicated on each axis:
  /// mean = rho, kappa = 1/nu, df = 2a + d - 1, psi = 2b I.
  static NiwParams from_nig(double rho, double nu, double a, double b,
                            std::size_t d);

  friend bool operator==(const NiwParams& x, const NiwParams& y) {
    return x.kappa_ == y.kappa_ && x.df_ == y.df_ && x.mean_ == y.mean_ &&
           x.psi_ == y.psi_;
  }

private:
  struct Unchecked {};
  NiwParams(Unchecked, Eigen::VectorXd mean, double kappa, Eigen::MatrixXd psi,
            double df, Eigen::LLT<Eigen::MatrixXd> chol);

  friend NiwParams niw_weighted_update(const NiwParams&, Observation, double);

  Eigen::VectorXd mean_;
  double kappa_;
  Eigen::MatrixXd psi_;
  double df_;
  Eigen::LLT<Eigen::MatrixXd> chol_;
};

/// Posterior after raising the likelihood of `y` to the power `w` in [0, 1].
/// psi changes by the rank-one term kappa w/(kappa+w) (y-mean)(y-mean)^T, so
/// the factor is updated in place; a failed update falls back to a fresh
/// factorization and then to NumericError.
[[nodiscard]] NiwParams niw_weighted_update(const NiwParams& p, Observation y,
                                            double w);

/// Multivariate t with df-d+1 degrees of freedom, location mean and scale
/// psi (kappa+1) / (kappa (df-d+1)).
[[nodiscard]] double niw_log_predictive(const NiwParams& p, Observation y);
[[nodiscard]] double niw_predictive(const NiwParams& p, Observation y);

[[nodiscard]] double niw_expected_loglik(const NiwParams& post, Observation y);
[[nodiscard]] double niw_kl(const NiwParams& post, const NiwParams& prior);

struct NiwStats {
  double n = 0.0;
  Eigen::VectorXd sum;
  Eigen::MatrixXd outer;

  explicit NiwStats(std::size_t d = 0)
      : sum(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d))),
        outer(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d),
                                    static_cast<Eigen::Index>(d))) {}
  void add(Observation y, double w = 1.0);
};

[[nodiscard]] NiwParams niw_posterior(const NiwParams& prior,
                                      const NiwStats& stats);
[[nodiscard]] double niw_log_marginal(const NiwParams& prior,
                                      const NiwStats& stats);

class NiwPredictiveKernel {
public:
  explicit NiwPredictiveKernel(const NiwParams& p);
  [[nodiscard]] double log_density(Observation y) const;

private:
  Eigen::VectorXd loc_;
  Eigen::MatrixXd chol_; // lower factor of psi
  double log_norm_;
  double half_df_plus_dim_;
  double maha_scale_; // converts y^T psi^-1 y to the t quadratic form / df
};

[[nodiscard]] inline std::size_t dimension(const NiwParams& p) {
  return p.dim();
}
[[nodiscard]] inline NiwParams weighted_update(const NiwParams& p,
                                               Observation y, double w) {
  return niw_weighted_update(p, y, w);
}
[[nodiscard]] inline double log_predictive(const NiwParams& p, Observation y) {
  return niw_log_predictive(p, y);
}
[[nodiscard]] inline double expected_loglik(const NiwParams& post,
                                            Observation y) {
  return niw_expected_loglik(post, y);
}
[[nodiscard]] inline double kl_divergence(const NiwParams& post,
                                          const NiwParams& prior) {
  return niw_kl(post, prior);
}
[[nodiscard]] inline NiwStats empty_stats(const NiwParams& p) {
  return NiwStats(p.dim());
}
inline void add_observation(NiwStats& s, Observation y, double w = 1.0) {
  s.add(y, w);
}
[[nodiscard]] inline NiwParams posterior(const NiwParams& prior,
                                         const NiwStats& s) {
  return niw_posterior(prior, s);
}
[[nodiscard]] inline double log_marginal(const NiwParams& prior,
                                         const NiwStats& s) {
  return niw_log_marginal(prior, s);
}
[[nodiscard]] inline NiwPredictiveKernel predictive_kernel(const NiwParams& p) {
  return NiwPredictiveKernel(p);
}
[[nodiscard]] inline double log_density(const NiwPredictiveKernel& k,
                                        Observation y) {
  return k.log_density(y);
}

} // namespace dpmseq
