#include "dpmseq/urn.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace dpmseq {

double ClusterSoftCounts::total() const noexcept {
  return std::accumulate(counts.begin(), counts.end(), 0.0);
}

namespace {

void check_alpha(double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha))
    throw std::invalid_argument("urn: alpha must be positive and finite");
}

void check_hard_counts(std::span<const std::size_t> counts,
                       std::size_t step) {
  if (step < 1) throw std::invalid_argument("urn: step index must be >= 1");
  std::size_t total = 0;
  for (auto c : counts) {
    if (c == 0)
      throw std::invalid_argument("urn: occupied labels need count >= 1");
    total += c;
  }
  if (total != step - 1)
    throw std::invalid_argument("urn: counts sum to " + std::to_string(total) +
                                ", expected " + std::to_string(step - 1));
}

AllocationDistribution from_log(const std::vector<double>& logw) {
  AllocationDistribution q;
  q.probs.reserve(logw.size());
  for (double l : logw) q.probs.push_back(std::exp(l));
  return q;
}

std::vector<double> to_double(std::span<const std::size_t> counts) {
  return {counts.begin(), counts.end()};
}

} // namespace

namespace detail {

std::size_t log_urn_weights(std::span<const double> counts, double alpha,
                            std::optional<std::size_t> trunc, double mass,
                            std::vector<double>& out) {
  const double log_denom = std::log(alpha + mass);
  const double prior_share =
      trunc ? alpha / static_cast<double>(*trunc) : 0.0;
  const std::size_t occupied = counts.size();
  out.resize(occupied + 1);
  for (std::size_t j = 0; j < occupied; ++j)
    out[j] = std::log(counts[j] + prior_share) - log_denom;
  double new_mass = alpha;
  if (trunc) {
    if (occupied >= *trunc) {
      out.resize(occupied);
      return occupied;
    }
    new_mass = alpha * (1.0 - static_cast<double>(occupied) /
                                  static_cast<double>(*trunc));
  }
  out[occupied] = std::log(new_mass) - log_denom;
  return occupied + 1;
}

} // namespace detail

AllocationDistribution urn_prior(std::span<const std::size_t> hard_counts,
                                 double alpha, std::size_t step) {
  check_alpha(alpha);
  check_hard_counts(hard_counts, step);
  std::vector<double> logw;
  detail::log_urn_weights(to_double(hard_counts), alpha, std::nullopt,
                          static_cast<double>(step - 1), logw);
  return from_log(logw);
}

AllocationDistribution truncated_urn_prior(
    std::span<const std::size_t> hard_counts, double alpha, std::size_t trunc,
    std::size_t step) {
  check_alpha(alpha);
  check_hard_counts(hard_counts, step);
  if (trunc < 1) throw std::invalid_argument("urn: truncation must be >= 1");
  if (trunc < hard_counts.size())
    throw std::invalid_argument(
        "urn: truncation below the number of occupied clusters");
  std::vector<double> logw;
  detail::log_urn_weights(to_double(hard_counts), alpha, trunc,
                          static_cast<double>(step - 1), logw);
  return from_log(logw);
}

AllocationDistribution soft_urn_weights(std::span<const double> soft_counts,
                                        double alpha, std::size_t trunc,
                                        std::size_t step) {
  check_alpha(alpha);
  if (step < 1) throw std::invalid_argument("urn: step index must be >= 1");
  if (trunc < 1) throw std::invalid_argument("urn: truncation must be >= 1");
  if (soft_counts.size() > std::min(step - 1, trunc))
    throw std::invalid_argument(
        "urn: more opened labels than min(step-1, truncation)");
  double total = 0.0;
  for (double c : soft_counts) {
    if (!(c >= 0.0) || !std::isfinite(c))
      throw std::invalid_argument("urn: soft counts must be finite and >= 0");
    total += c;
  }
  const double expected = static_cast<double>(step - 1);
  if (std::abs(total - expected) > 1e-9 * std::max(1.0, expected))
    throw std::invalid_argument("urn: soft counts total " +
                                std::to_string(total) + ", expected " +
                                std::to_string(expected));
  std::vector<double> logw;
  detail::log_urn_weights(soft_counts, alpha, trunc, expected, logw);
  return from_log(logw);
}

} // namespace dpmseq
