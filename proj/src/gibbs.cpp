#include "dpmseq/gibbs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace dpmseq {

void GibbsConfig::validate() const {
  if (iters < 1) throw std::invalid_argument("gibbs: iters must be >= 1");
  if (thin < 1) throw std::invalid_argument("gibbs: thin must be >= 1");
}

std::vector<std::uint32_t> canonical_labels(
    std::span<const std::uint32_t> labels) {
  std::vector<std::uint32_t> out(labels.size());
  std::vector<std::uint32_t> map;
  constexpr auto unset = std::numeric_limits<std::uint32_t>::max();
  std::uint32_t next = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= map.size()) map.resize(labels[i] + 1, unset);
    if (map[labels[i]] == unset) map[labels[i]] = next++;
    out[i] = map[labels[i]];
  }
  return out;
}

namespace {

template <ConjugateFamily P>
struct Cluster {
  std::size_t count;
  StatsOf<P> stats;
  KernelOf<P> kernel;
};

template <ConjugateFamily P>
void refresh(Cluster<P>& c, const P& prior) {
  c.kernel = predictive_kernel(posterior(prior, c.stats));
}

#ifndef NDEBUG
template <ConjugateFamily P>
void check_downdates(const std::vector<Cluster<P>>& clusters,
                     const std::vector<std::size_t>& z, const Dataset& data,
                     const P& prior) {
  for (std::size_t k = 0; k < clusters.size(); ++k) {
    auto fresh = empty_stats(prior);
    for (std::size_t i = 0; i < z.size(); ++i)
      if (z[i] == k) add_observation(fresh, data.row(i));
    const double a = log_marginal(prior, fresh);
    const double b = log_marginal(prior, clusters[k].stats);
    if (std::abs(a - b) > 1e-6 * std::max(1.0, std::abs(a)))
      throw NumericError("gibbs: sufficient-statistic downdates drifted");
  }
}
#endif

} // namespace

template <ConjugateFamily P>
PosteriorSamples collapsed_gibbs(const Dataset& data, const P& prior,
                                 double alpha,
                                 std::optional<std::size_t> trunc,
                                 const GibbsConfig& cfg) {
  cfg.validate();
  if (data.size() == 0) throw std::invalid_argument("gibbs: empty data");
  if (!(alpha > 0.0)) throw std::invalid_argument("gibbs: alpha must be > 0");
  if (trunc && *trunc < 1) throw std::invalid_argument("gibbs: trunc >= 1");
  if (data.dim() != dimension(prior))
    throw std::invalid_argument("gibbs: data dimension mismatch");

  const std::size_t n = data.size();
  const double prior_share = trunc ? alpha / static_cast<double>(*trunc) : 0.0;
  const KernelOf<P> prior_kernel = predictive_kernel(prior);
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  std::vector<Cluster<P>> clusters;
  std::vector<std::size_t> z(n, 0);
  clusters.push_back({0, empty_stats(prior), prior_kernel});
  for (std::size_t i = 0; i < n; ++i) {
    add_observation(clusters[0].stats, data.row(i));
    ++clusters[0].count;
  }
  refresh(clusters[0], prior);

  std::vector<double> logw;
  auto sweep = [&] {
    for (std::size_t i = 0; i < n; ++i) {
      const auto y = data.row(i);
      std::size_t c = z[i];
      add_observation(clusters[c].stats, y, -1.0);
      if (--clusters[c].count == 0) {
        const std::size_t last = clusters.size() - 1;
        if (c != last) {
          clusters[c] = std::move(clusters[last]);
          for (auto& l : z)
            if (l == last) l = c;
        }
        clusters.pop_back();
      } else {
        refresh(clusters[c], prior);
      }

      const std::size_t k = clusters.size();
      logw.resize(k + 1);
      for (std::size_t j = 0; j < k; ++j)
        logw[j] = std::log(static_cast<double>(clusters[j].count) + prior_share) +
                  log_density(clusters[j].kernel, y);
      std::size_t slots = k;
      if (!trunc || k < *trunc) {
        const double new_mass =
            trunc ? alpha * (1.0 - static_cast<double>(k) /
                                       static_cast<double>(*trunc))
                  : alpha;
        logw[k] = std::log(new_mass) + log_density(prior_kernel, y);
        slots = k + 1;
      }
      logw.resize(slots);
      const double top = *std::max_element(logw.begin(), logw.end());
      double total = 0.0;
      for (double& w : logw) total += (w = std::exp(w - top));
      double u = unif(rng) * total;
      std::size_t pick = slots - 1;
      for (std::size_t j = 0; j < slots; ++j) {
        u -= logw[j];
        if (u < 0.0) {
          pick = j;
          break;
        }
      }
      if (pick == k) clusters.push_back({0, empty_stats(prior), prior_kernel});
      add_observation(clusters[pick].stats, y);
      ++clusters[pick].count;
      refresh(clusters[pick], prior);
      z[i] = pick;
    }
  };

  PosteriorSamples out;
  out.allocation_draws.reserve(cfg.iters);
  out.cluster_count_draws.reserve(cfg.iters);
  const std::size_t total_sweeps = cfg.burnin + cfg.iters * cfg.thin;
  std::vector<std::uint32_t> labels(n);
  for (std::size_t s = 1; s <= total_sweeps; ++s) {
    sweep();
#ifndef NDEBUG
    if (s % 1000 == 0) check_downdates(clusters, z, data, prior);
#endif
    if (s > cfg.burnin && (s - cfg.burnin) % cfg.thin == 0) {
      for (std::size_t i = 0; i < n; ++i)
        labels[i] = static_cast<std::uint32_t>(z[i]);
      out.allocation_draws.push_back(canonical_labels(labels));
      out.cluster_count_draws.push_back(clusters.size());
    }
  }
  return out;
}

template <ConjugateFamily P>
GibbsPredictive<P>::GibbsPredictive(const PosteriorSamples& samples,
                                    const Dataset& data, const P& prior,
                                    double alpha,
                                    std::optional<std::size_t> trunc) {
  if (samples.num_draws() == 0)
    throw std::invalid_argument("gibbs predictive: no draws");
  const std::size_t n = data.size();
  const double prior_share = trunc ? alpha / static_cast<double>(*trunc) : 0.0;
  const double log_denom = std::log(alpha + static_cast<double>(n));
  draws_.reserve(samples.num_draws());
  for (const auto& labels : samples.allocation_draws) {
    if (labels.size() != n)
      throw std::invalid_argument("gibbs predictive: draw length mismatch");
    std::uint32_t k = 0;
    for (auto l : labels) k = std::max(k, l + 1);
    std::vector<StatsOf<P>> stats(k, empty_stats(prior));
    std::vector<double> counts(k, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      add_observation(stats[labels[i]], data.row(i));
      counts[labels[i]] += 1.0;
    }
    Draw d;
    for (std::uint32_t j = 0; j < k; ++j) {
      d.log_weights.push_back(std::log(counts[j] + prior_share) - log_denom);
      d.kernels.push_back(predictive_kernel(posterior(prior, stats[j])));
    }
    if (!trunc || k < *trunc) {
      const double new_mass =
          trunc ? alpha * (1.0 - static_cast<double>(k) /
                                     static_cast<double>(*trunc))
                : alpha;
      d.log_weights.push_back(std::log(new_mass) - log_denom);
      d.kernels.push_back(predictive_kernel(prior));
    }
    draws_.push_back(std::move(d));
  }
}

template <ConjugateFamily P>
double GibbsPredictive<P>::draw_density(const Draw& d, Observation y) const {
  double s = 0.0;
  for (std::size_t j = 0; j < d.kernels.size(); ++j)
    s += std::exp(d.log_weights[j] + log_density(d.kernels[j], y));
  return s;
}

template <ConjugateFamily P>
double GibbsPredictive<P>::density(Observation y) const {
  double s = 0.0;
  for (const auto& d : draws_) s += draw_density(d, y);
  return s / static_cast<double>(draws_.size());
}

template <ConjugateFamily P>
std::vector<double> GibbsPredictive<P>::draw_densities(Observation y) const {
  std::vector<double> out;
  out.reserve(draws_.size());
  for (const auto& d : draws_) out.push_back(draw_density(d, y));
  return out;
}

template PosteriorSamples collapsed_gibbs(const Dataset&, const NigParams&,
                                          double, std::optional<std::size_t>,
                                          const GibbsConfig&);
template PosteriorSamples collapsed_gibbs(const Dataset&, const NiwParams&,
                                          double, std::optional<std::size_t>,
                                          const GibbsConfig&);
template class GibbsPredictive<NigParams>;
template class GibbsPredictive<NiwParams>;

} // namespace dpmseq
