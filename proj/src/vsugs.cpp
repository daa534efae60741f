#include "dpmseq/vsugs.hpp"

#include "dpmseq/urn.hpp"
#include "math_util.hpp"

#include <boost/math/special_functions/digamma.hpp>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <type_traits>

namespace dpmseq {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

template <class P>
P apply_update(const P& p, Observation y, double w, const VsugsOptions& o) {
  if constexpr (std::is_same_v<P, NigParams>)
    return nig_weighted_update(p, y[0], w, o.rate_update);
  else
    return weighted_update(p, y, w);
}

// Expected log-likelihood with the typeset precision factor b/a.
double printed_expected_loglik(const NigParams& q, double y) {
  const double d = y - q.rho;
  return 0.5 * boost::math::digamma(q.a) - 0.5 * std::log(q.b) -
         0.5 * kLog2Pi - 0.5 * (q.nu + d * d * q.b / q.a);
}

template <class P>
double component_bound(const P& prev, const P& next, double qhat,
                       double log_qij, Observation y, BoundForm form) {
  const double kl = (prev == next) ? 0.0 : kl_divergence(next, prev);
  double r = form == BoundForm::Printed ? kl : -kl;
  if (qhat > 0.0) {
    double ell;
    if constexpr (std::is_same_v<P, NigParams>)
      ell = form == BoundForm::Printed ? printed_expected_loglik(next, y[0])
                                       : expected_loglik(next, y);
    else
      ell = expected_loglik(next, y);
    r += qhat * (ell - std::log(qhat) + log_qij);
  }
  return r;
}

} // namespace

void VsugsOptions::validate() const {
  if (!(alpha > 0.0) || !std::isfinite(alpha))
    throw std::invalid_argument("vsugs: alpha must be positive and finite");
  if (trunc < 1) throw std::invalid_argument("vsugs: truncation must be >= 1");
}

template <ConjugateFamily P>
VsugsFit<P>::VsugsFit(P prior, const VsugsOptions& opts)
    : state(std::move(prior), opts.alpha, opts.trunc), options(opts),
      prior_kernel_(predictive_kernel(state.prior)) {
  opts.validate();
  if constexpr (!std::is_same_v<P, NigParams>) {
    if (opts.bound == BoundForm::Printed ||
        opts.rate_update == RateUpdate::Printed)
      throw std::invalid_argument(
          "vsugs: printed diagnostic forms exist only for NIG components");
  }
}

template <ConjugateFamily P>
AllocationDistribution vsugs_allocate(const FitState<P>& state,
                                      Observation y) {
  if (y.size() != dimension(state.prior))
    throw std::invalid_argument("vsugs_allocate: dimension mismatch");
  std::vector<double> logw;
  const std::size_t slots = detail::log_urn_weights(
      state.soft_counts, state.alpha, state.trunc,
      static_cast<double>(state.processed), logw);
  for (std::size_t j = 0; j < slots; ++j)
    logw[j] += log_predictive(
        j < state.clusters.size() ? state.clusters[j] : state.prior, y);
  const double norm = detail::log_sum_exp(logw);
  if (!std::isfinite(norm))
    throw NumericError("vsugs_allocate: all predictive values underflow");
  AllocationDistribution q;
  q.probs.reserve(slots);
  for (double l : logw) q.probs.push_back(std::exp(l - norm));
  return q;
}

template <ConjugateFamily P>
AllocationDistribution vsugs_step(VsugsFit<P>& fit, Observation y,
                                  double weight) {
  auto& st = fit.state;
  const auto& opts = fit.options;
  if (y.size() != dimension(st.prior))
    throw std::invalid_argument("vsugs_step: observation dimension mismatch");
  if (!(weight > 0.0 && weight <= 1.0))
    throw std::invalid_argument("vsugs_step: weight must be in (0, 1]");

  const std::size_t occupied = st.clusters.size();
  const std::size_t slots = detail::log_urn_weights(
      st.soft_counts, st.alpha, st.trunc, fit.mass_, fit.log_urn_);
  fit.log_score_.resize(slots);
  std::size_t chosen = 0;
  for (std::size_t j = 0; j < slots; ++j) {
    const auto& k = j < occupied ? fit.kernels_[j] : fit.prior_kernel_;
    fit.log_score_[j] = fit.log_urn_[j] + log_density(k, y);
    if (std::isnan(fit.log_score_[j]))
      throw NumericError("vsugs_step: non-finite predictive value");
    if (fit.log_score_[j] > fit.log_score_[chosen]) chosen = j;
  }
  const double top = fit.log_score_[chosen];
  if (!std::isfinite(top))
    throw NumericError("vsugs_step: all predictive values underflow");

  AllocationDistribution q;
  q.probs.resize(slots, 0.0);
  if (opts.mode == AllocationMode::Hard) {
    q.probs[chosen] = 1.0;
  } else {
    double total = 0.0;
    for (std::size_t j = 0; j < slots; ++j)
      total += q.probs[j] = std::exp(fit.log_score_[j] - top);
    for (double& p : q.probs) p /= total;
  }

  if (slots > occupied) {
    if (opts.mode == AllocationMode::Soft || chosen == occupied) {
      st.clusters.push_back(st.prior);
      st.soft_counts.push_back(0.0);
      fit.kernels_.push_back(fit.prior_kernel_);
    } else {
      q.probs.resize(occupied);
    }
  }

  double bound = 0.0;
  for (std::size_t j = 0; j < st.clusters.size(); ++j) {
    const double w = weight * q.probs[j];
    if (w >= kMinUpdateWeight) {
      P next = apply_update(st.clusters[j], y, w, opts);
      bound += component_bound(st.clusters[j], next, w, fit.log_urn_[j], y,
                               opts.bound);
      st.clusters[j] = std::move(next);
      fit.kernels_[j] = predictive_kernel(st.clusters[j]);
    } else if (w > 0.0) {
      bound += component_bound(st.clusters[j], st.clusters[j], w,
                               fit.log_urn_[j], y, opts.bound);
    }
    st.soft_counts[j] += w;
  }
  ++st.processed;
  fit.mass_ += weight;
  st.lower_bound += bound;
  if (!std::isfinite(st.lower_bound))
    throw NumericError("vsugs_step: lower bound is not finite");
  if (opts.keep_allocations) fit.allocations.push_back(q);
  return q;
}

template <ConjugateFamily P>
double step_lower_bound(std::span<const P> prev, std::span<const P> next,
                        const AllocationDistribution& qhat,
                        const AllocationDistribution& qij, Observation y,
                        BoundForm form) {
  if (prev.size() != next.size() || qhat.size() != prev.size() ||
      qij.size() != prev.size())
    throw std::invalid_argument("step_lower_bound: inconsistent lengths");
  if constexpr (!std::is_same_v<P, NigParams>) {
    if (form == BoundForm::Printed)
      throw std::invalid_argument(
          "step_lower_bound: printed form exists only for NIG components");
  }
  double r = 0.0;
  for (std::size_t j = 0; j < prev.size(); ++j)
    r += component_bound(prev[j], next[j], qhat[j],
                         qhat[j] > 0.0 ? std::log(qij[j]) : 0.0, y, form);
  return r;
}

template <ConjugateFamily P>
VsugsFit<P> vsugs_fit(const Dataset& data, const P& prior,
                      const VsugsOptions& opts) {
  if (data.size() == 0) throw std::invalid_argument("vsugs_fit: empty data");
  VsugsFit<P> fit(prior, opts);
  if (opts.keep_allocations) fit.allocations.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) vsugs_step(fit, data.row(i));
  return fit;
}

template <ConjugateFamily P>
double log_predictive_density(const VsugsFit<P>& fit, Observation y) {
  const auto& st = fit.state;
  if (y.size() != dimension(st.prior))
    throw std::invalid_argument("predictive_density: dimension mismatch");
  std::vector<double> logw;
  const std::size_t slots = detail::log_urn_weights(
      st.soft_counts, st.alpha, st.trunc, fit.mass(), logw);
  for (std::size_t j = 0; j < slots; ++j)
    logw[j] += log_density(
        j < st.clusters.size() ? fit.kernel(j) : fit.prior_kernel(), y);
  return detail::log_sum_exp(logw);
}

template <ConjugateFamily P>
double predictive_density(const VsugsFit<P>& fit, Observation y) {
  return std::exp(log_predictive_density(fit, y));
}

#define DPMSEQ_VSUGS_INSTANTIATE(P)                                            \
  template class VsugsFit<P>;                                                  \
  template AllocationDistribution vsugs_allocate(const FitState<P>&,           \
                                                 Observation);                 \
  template AllocationDistribution vsugs_step(VsugsFit<P>&, Observation, double); \
  template double step_lower_bound(std::span<const P>, std::span<const P>,     \
                                   const AllocationDistribution&,              \
                                   const AllocationDistribution&, Observation, \
                                   BoundForm);                                 \
  template VsugsFit<P> vsugs_fit(const Dataset&, const P&,                     \
                                 const VsugsOptions&);                         \
  template double log_predictive_density(const VsugsFit<P>&, Observation);     \
  template double predictive_density(const VsugsFit<P>&, Observation);

DPMSEQ_VSUGS_INSTANTIATE(NigParams)
DPMSEQ_VSUGS_INSTANTIATE(NiwParams)

} // namespace dpmseq
