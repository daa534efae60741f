#include "dpmseq/enumerate.hpp"

#include "math_util.hpp"

#include <cmath>
#include <stdexcept>

namespace dpmseq {

namespace {

template <ConjugateFamily P>
struct Enumerator {
  const Dataset& data;
  const P& prior;
  double alpha;
  std::optional<std::size_t> trunc;

  struct Leaf {
    std::vector<std::uint32_t> labels;
    double log_joint;
  };
  std::vector<Leaf> leaves;
  std::vector<std::uint32_t> labels;
  std::vector<std::size_t> counts;

  double prior_share() const {
    return trunc ? alpha / static_cast<double>(*trunc) : 0.0;
  }

  // Label strings with label k+1 allowed only once label k is in use.
  void walk(std::size_t i, double log_prior) {
    const std::size_t n = data.size();
    if (i == n) {
      std::vector<StatsOf<P>> stats(counts.size(), empty_stats(prior));
      for (std::size_t m = 0; m < n; ++m)
        add_observation(stats[labels[m]], data.row(m));
      double lj = log_prior;
      for (const auto& s : stats) lj += log_marginal(prior, s);
      leaves.push_back({labels, lj});
      return;
    }
    const double denom = alpha + static_cast<double>(i);
    const std::size_t k = counts.size();
    for (std::size_t j = 0; j < k; ++j) {
      labels[i] = static_cast<std::uint32_t>(j);
      ++counts[j];
      walk(i + 1, log_prior +
                      std::log((static_cast<double>(counts[j] - 1) +
                                prior_share()) /
                               denom));
      --counts[j];
    }
    if (!trunc || k < *trunc) {
      const double new_mass =
          trunc ? alpha * (1.0 - static_cast<double>(k) /
                                     static_cast<double>(*trunc))
                : alpha;
      labels[i] = static_cast<std::uint32_t>(k);
      counts.push_back(1);
      walk(i + 1, log_prior + std::log(new_mass / denom));
      counts.pop_back();
    }
  }
};

} // namespace

template <ConjugateFamily P>
double ExactPosterior<P>::predictive(Observation y) const {
  double s = 0.0;
  for (const auto& t : terms)
    for (std::size_t j = 0; j < t.kernels.size(); ++j)
      s += t.probability * std::exp(t.log_weights[j] + log_density(t.kernels[j], y));
  return s;
}

template <ConjugateFamily P>
ExactPosterior<P> enumerate_exact(const Dataset& data, const P& prior,
                                  double alpha,
                                  std::optional<std::size_t> trunc) {
  const std::size_t n = data.size();
  if (n == 0) throw std::invalid_argument("enumerate_exact: empty data");
  if (n > kMaxEnumerationSize)
    throw std::invalid_argument("enumerate_exact: N above enumeration cap");
  if (!(alpha > 0.0))
    throw std::invalid_argument("enumerate_exact: alpha must be > 0");
  if (trunc && *trunc < 1)
    throw std::invalid_argument("enumerate_exact: trunc must be >= 1");
  if (data.dim() != dimension(prior))
    throw std::invalid_argument("enumerate_exact: dimension mismatch");

  Enumerator<P> e{data, prior, alpha, trunc, {}, std::vector<std::uint32_t>(n), {}};
  e.walk(0, 0.0);

  std::vector<double> lj;
  lj.reserve(e.leaves.size());
  for (const auto& l : e.leaves) lj.push_back(l.log_joint);

  ExactPosterior<P> out;
  out.log_marginal = detail::log_sum_exp(lj);
  const double share = e.prior_share();
  const double log_denom = std::log(alpha + static_cast<double>(n));
  for (const auto& leaf : e.leaves) {
    const double p = std::exp(leaf.log_joint - out.log_marginal);
    out.partition_posterior[leaf.labels] = p;

    std::size_t k = 0;
    for (auto l : leaf.labels) k = std::max<std::size_t>(k, l + 1);
    std::vector<StatsOf<P>> stats(k, empty_stats(prior));
    std::vector<double> counts(k, 0.0);
    for (std::size_t m = 0; m < n; ++m) {
      add_observation(stats[leaf.labels[m]], data.row(m));
      counts[leaf.labels[m]] += 1.0;
    }
    typename ExactPosterior<P>::Term t{p, {}, {}};
    for (std::size_t j = 0; j < k; ++j) {
      t.log_weights.push_back(std::log(counts[j] + share) - log_denom);
      t.kernels.push_back(predictive_kernel(posterior(prior, stats[j])));
    }
    if (!trunc || k < *trunc) {
      const double new_mass =
          trunc ? alpha * (1.0 - static_cast<double>(k) /
                                     static_cast<double>(*trunc))
                : alpha;
      t.log_weights.push_back(std::log(new_mass) - log_denom);
      t.kernels.push_back(predictive_kernel(prior));
    }
    out.terms.push_back(std::move(t));
  }
  return out;
}

template struct ExactPosterior<NigParams>;
template struct ExactPosterior<NiwParams>;
template ExactPosterior<NigParams> enumerate_exact(const Dataset&,
                                                   const NigParams&, double,
                                                   std::optional<std::size_t>);
template ExactPosterior<NiwParams> enumerate_exact(const Dataset&,
                                                   const NiwParams&, double,
                                                   std::optional<std::size_t>);

} // namespace dpmseq
