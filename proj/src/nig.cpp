#include "dpmseq/nig.hpp"

#include <boost/math/special_functions/digamma.hpp>

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace dpmseq {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

bool finite_positive(double x) { return x > 0.0 && std::isfinite(x); }

} // namespace

void NigParams::validate() const {
  if (!std::isfinite(rho) || !finite_positive(nu) || !finite_positive(a) ||
      !finite_positive(b))
    throw std::invalid_argument(
        "NigParams: need finite rho and positive finite nu, a, b");
}

NigParams nig_weighted_update(const NigParams& p, double y, double w,
                              RateUpdate form) {
  if (!(w >= 0.0 && w <= 1.0))
    throw std::invalid_argument("nig_weighted_update: weight outside [0, 1]");
  if (!std::isfinite(y))
    throw std::invalid_argument("nig_weighted_update: non-finite observation");
  if (w < kMinUpdateWeight) return p;

  const double prec = 1.0 / p.nu;
  const double prec_new = prec + w;
  NigParams q;
  q.nu = 1.0 / prec_new;
  q.rho = q.nu * (prec * p.rho + w * y);
  q.a = p.a + 0.5 * w;
  if (form == RateUpdate::Conjugate) {
    // Equal to b + (w y^2 + rho^2/nu - rho'^2/nu')/2 without the cancellation.
    const double d = y - p.rho;
    q.b = p.b + 0.5 * (prec * w / prec_new) * d * d;
  } else {
    q.b = p.b + 0.5 * (w * y * y + q.rho * q.rho / q.nu - p.rho * p.rho / p.nu);
    if (!(q.b > 0.0))
      throw NumericError("nig_weighted_update: printed rate update went "
                         "non-positive");
  }
  return q;
}

NigPredictiveKernel::NigPredictiveKernel(const NigParams& p)
    : loc_(p.rho), half_df_plus_one_(p.a + 0.5) {
  const double df_scale2 = 2.0 * p.b * (p.nu + 1.0);
  inv_df_scale2_ = 1.0 / df_scale2;
  log_norm_ = std::lgamma(p.a + 0.5) - std::lgamma(p.a) -
              0.5 * std::log(std::numbers::pi * df_scale2);
}

double nig_log_predictive(const NigParams& p, double y) {
  return NigPredictiveKernel(p).log_density(y);
}

double nig_predictive(const NigParams& p, double y) {
  return std::exp(nig_log_predictive(p, y));
}

double nig_expected_loglik(const NigParams& post, double y) {
  using boost::math::digamma;
  const double d = y - post.rho;
  return 0.5 * (digamma(post.a) - std::log(post.b)) - 0.5 * kLog2Pi -
         0.5 * (post.nu + d * d * post.a / post.b);
}

double nig_kl(const NigParams& post, const NigParams& prior) {
  using boost::math::digamma;
  if (post == prior) return 0.0;
  const double gamma_part =
      (post.a - prior.a) * digamma(post.a) - std::lgamma(post.a) +
      std::lgamma(prior.a) + prior.a * (std::log(post.b) - std::log(prior.b)) +
      post.a * (prior.b - post.b) / post.b;
  const double dm = post.rho - prior.rho;
  const double ratio = post.nu / prior.nu;
  const double normal_part = dm * dm / (2.0 * prior.nu) * post.a / post.b +
                             0.5 * (ratio - 1.0 - std::log(ratio));
  return gamma_part + normal_part;
}

NigParams nig_posterior(const NigParams& prior, const NigStats& s) {
  if (s.n <= 0.0) return prior;
  const double prec0 = 1.0 / prior.nu;
  const double mean = s.sum / s.n;
  const double scatter = std::max(0.0, s.sumsq - s.n * mean * mean);
  const double prec = prec0 + s.n;
  NigParams q;
  q.nu = 1.0 / prec;
  q.rho = (prec0 * prior.rho + s.sum) / prec;
  q.a = prior.a + 0.5 * s.n;
  const double d = mean - prior.rho;
  q.b = prior.b + 0.5 * scatter + 0.5 * prec0 * s.n * d * d / prec;
  return q;
}

double nig_log_marginal(const NigParams& prior, const NigStats& s) {
  if (s.n <= 0.0) return 0.0;
  const NigParams q = nig_posterior(prior, s);
  return std::lgamma(q.a) - std::lgamma(prior.a) + prior.a * std::log(prior.b) -
         q.a * std::log(q.b) + 0.5 * std::log(q.nu / prior.nu) -
         0.5 * s.n * kLog2Pi;
}

NigParams weighted_update(const NigParams& p, Observation y, double w) {
  return nig_weighted_update(p, y[0], w);
}

double log_predictive(const NigParams& p, Observation y) {
  return nig_log_predictive(p, y[0]);
}

double expected_loglik(const NigParams& post, Observation y) {
  return nig_expected_loglik(post, y[0]);
}

void add_observation(NigStats& s, Observation y, double w) { s.add(y[0], w); }

} // namespace dpmseq
