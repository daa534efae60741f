#include "dpmseq/sugs.hpp"

#include "dpmseq/urn.hpp"
#include "math_util.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace dpmseq {

template <ConjugateFamily P>
SugsFit<P>::SugsFit(P prior, const SugsOptions& opts)
    : state(std::move(prior), opts.alpha, opts.truncation),
      prior_kernel_(predictive_kernel(state.prior)) {
  if (!(opts.alpha > 0.0) || !std::isfinite(opts.alpha))
    throw std::invalid_argument("sugs: alpha must be positive and finite");
  if (opts.truncation && *opts.truncation < 1)
    throw std::invalid_argument("sugs: truncation must be >= 1");
}

template <ConjugateFamily P>
void sugs_step(SugsFit<P>& fit, Observation y) {
  auto& st = fit.state;
  if (y.size() != dimension(st.prior))
    throw std::invalid_argument("sugs_step: observation dimension mismatch");

  thread_local std::vector<double> logw;
  const std::size_t occupied = st.clusters.size();
  const std::size_t slots = detail::log_urn_weights(
      st.soft_counts, st.alpha, st.trunc, static_cast<double>(st.processed),
      logw);

  std::size_t best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  double best_pred = 0.0;
  for (std::size_t j = 0; j < slots; ++j) {
    const auto& k = j < occupied ? fit.kernels_[j] : fit.prior_kernel_;
    const double lp = log_density(k, y);
    const double score = logw[j] + lp;
    if (std::isnan(score))
      throw NumericError("sugs_step: non-finite predictive value");
    if (score > best_score) {
      best_score = score;
      best = j;
      best_pred = lp;
    }
  }
  if (!std::isfinite(best_score))
    throw NumericError("sugs_step: every allocation score is -inf");

  if (best == occupied) {
    st.clusters.push_back(st.prior);
    st.soft_counts.push_back(0.0);
    fit.kernels_.push_back(fit.prior_kernel_);
  }
  st.clusters[best] = weighted_update(st.clusters[best], y, 1.0);
  fit.kernels_[best] = predictive_kernel(st.clusters[best]);
  st.soft_counts[best] += 1.0;
  ++st.processed;
  fit.allocations.push_back(best);
  fit.log_pseudo_marginal += best_pred;
}

template <ConjugateFamily P>
SugsFit<P> sugs_fit(const Dataset& data, const P& prior,
                    const SugsOptions& opts) {
  if (data.size() == 0) throw std::invalid_argument("sugs_fit: empty data");
  SugsFit<P> fit(prior, opts);
  fit.allocations.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) sugs_step(fit, data.row(i));
  return fit;
}

template <ConjugateFamily P>
double log_predictive_density(const SugsFit<P>& fit, Observation y) {
  const auto& st = fit.state;
  std::vector<double> logw;
  const std::size_t slots = detail::log_urn_weights(
      st.soft_counts, st.alpha, st.trunc, static_cast<double>(st.processed),
      logw);
  for (std::size_t j = 0; j < slots; ++j)
    logw[j] += log_density(
        j < st.clusters.size() ? fit.kernel(j) : fit.prior_kernel(), y);
  return detail::log_sum_exp(logw);
}

template <ConjugateFamily P>
double predictive_density(const SugsFit<P>& fit, Observation y) {
  return std::exp(log_predictive_density(fit, y));
}

template class SugsFit<NigParams>;
template class SugsFit<NiwParams>;
template void sugs_step(SugsFit<NigParams>&, Observation);
template void sugs_step(SugsFit<NiwParams>&, Observation);
template SugsFit<NigParams> sugs_fit(const Dataset&, const NigParams&,
                                     const SugsOptions&);
template SugsFit<NiwParams> sugs_fit(const Dataset&, const NiwParams&,
                                     const SugsOptions&);
template double log_predictive_density(const SugsFit<NigParams>&, Observation);
template double log_predictive_density(const SugsFit<NiwParams>&, Observation);
template double predictive_density(const SugsFit<NigParams>&, Observation);
template double predictive_density(const SugsFit<NiwParams>&, Observation);

} // namespace dpmseq
