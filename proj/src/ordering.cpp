#include "dpmseq/ordering.hpp"

#include <atomic>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <random>
#include <stdexcept>
#include <thread>

namespace dpmseq {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

template <ConjugateFamily P>
AnyFit<P> run_engine(const Dataset& data, const P& prior,
                     const EngineSpec& engine) {
  if (const auto* s = std::get_if<SugsOptions>(&engine))
    return sugs_fit(data, prior, *s);
  return vsugs_fit(data, prior, std::get<VsugsOptions>(engine));
}

Criterion resolve_criterion(const EngineSpec& engine,
                            std::optional<Criterion> requested) {
  const Criterion natural = std::holds_alternative<SugsOptions>(engine)
                                ? Criterion::PseudoMarginal
                                : Criterion::LowerBound;
  if (requested && *requested != natural)
    throw std::invalid_argument(
        "search_orderings: criterion not available for this engine");
  return natural;
}

} // namespace

std::vector<std::size_t> ordering_permutation(std::size_t n,
                                              std::uint64_t seed,
                                              std::size_t index) {
  const std::uint64_t key =
      splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(index) + 1));
  std::mt19937_64 rng(key);
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  for (std::size_t k = n; k > 1; --k) {
    std::uniform_int_distribution<std::size_t> pick(0, k - 1);
    std::swap(perm[k - 1], perm[pick(rng)]);
  }
  return perm;
}

template <ConjugateFamily P>
double fit_score(const AnyFit<P>& fit) {
  if (const auto* s = std::get_if<SugsFit<P>>(&fit))
    return pseudo_marginal(*s);
  return std::get<VsugsFit<P>>(fit).state.lower_bound;
}

template <ConjugateFamily P>
OrderingResult<P> search_orderings(const Dataset& data, const P& prior,
                                   const EngineSpec& engine,
                                   const OrderingSearchConfig& cfg) {
  if (data.size() == 0)
    throw std::invalid_argument("search_orderings: empty data");
  if (cfg.num_orderings < 1)
    throw std::invalid_argument("search_orderings: need at least 1 ordering");
  resolve_criterion(engine, cfg.criterion);

  const std::size_t count = cfg.num_orderings;
  std::vector<double> scores(count, -std::numeric_limits<double>::infinity());
  std::atomic<std::size_t> next{0};
  std::mutex mu;

  struct Best {
    std::size_t index;
    double score;
    std::optional<AnyFit<P>> fit;
  };
  std::vector<Best> locals;
  std::exception_ptr first_error;
  std::size_t first_error_index = count;

  auto better = [](double s, std::size_t i, double bs, std::size_t bi) {
    return s > bs || (s == bs && i < bi);
  };

  auto worker = [&] {
    Best local{count, -std::numeric_limits<double>::infinity(), std::nullopt};
    for (std::size_t idx = next++; idx < count; idx = next++) {
      const auto perm = ordering_permutation(data.size(), cfg.seed, idx);
      try {
        AnyFit<P> fit = run_engine(data.permuted(perm), prior, engine);
        const double s = fit_score<P>(fit);
        scores[idx] = s;
        if (!local.fit || better(s, idx, local.score, local.index))
          local = Best{idx, s, std::move(fit)};
      } catch (const std::exception&) {
        std::lock_guard lock(mu);
        if (idx < first_error_index) {
          first_error_index = idx;
          first_error = std::current_exception();
        }
      }
    }
    std::lock_guard lock(mu);
    locals.push_back(std::move(local));
  };

  const std::size_t threads = std::max<std::size_t>(1, std::min(cfg.threads, count));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  Best* best = nullptr;
  for (auto& l : locals)
    if (l.fit && (!best || better(l.score, l.index, best->score, best->index)))
      best = &l;
  if (!best) std::rethrow_exception(first_error);

  OrderingResult<P> out{std::move(*best->fit),
                        ordering_permutation(data.size(), cfg.seed, best->index),
                        best->index, std::move(scores)};
  return out;
}

template double fit_score(const AnyFit<NigParams>&);
template double fit_score(const AnyFit<NiwParams>&);
template OrderingResult<NigParams> search_orderings(const Dataset&,
                                                    const NigParams&,
                                                    const EngineSpec&,
                                                    const OrderingSearchConfig&);
template OrderingResult<NiwParams> search_orderings(const Dataset&,
                                                    const NiwParams&,
                                                    const EngineSpec&,
                                                    const OrderingSearchConfig&);

} // namespace dpmseq
