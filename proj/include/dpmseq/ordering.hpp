#pragma once

// Fit SUGS or VSUGS over many random orderings of the data and keep the best
// by the engine's model score.

#include "dpmseq/conjugate.hpp"
#include "dpmseq/sugs.hpp"
#include "dpmseq/types.hpp"
#include "dpmseq/vsugs.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

namespace dpmseq {

enum class Criterion { PseudoMarginal, LowerBound };

struct OrderingSearchConfig {
  std::size_t num_orderings = 50;
  std::uint64_t seed = 0;
  /// Defaults to PseudoMarginal for SUGS and LowerBound for VSUGS; other
  /// combinations are rejected.
  std::optional<Criterion> criterion;
  std::size_t threads = 1;
};

using EngineSpec = std::variant<SugsOptions, VsugsOptions>;

template <ConjugateFamily P>
using AnyFit = std::variant<SugsFit<P>, VsugsFit<P>>;

template <ConjugateFamily P>
struct OrderingResult {
  AnyFit<P> best_fit; ///< fitted on data.permuted(best_permutation)
  std::vector<std::size_t> best_permutation;
  std::size_t best_index = 0;
  std::vector<double> scores; ///< -inf for orderings whose fit failed
};

/// Fisher-Yates permutation of 0..n-1 drawn from a generator keyed on
/// (seed, index), so each ordering can be reproduced on its own.
[[nodiscard]] std::vector<std::size_t> ordering_permutation(
    std::size_t n, std::uint64_t seed, std::size_t index);

/// Model score the ordering search maximizes.
template <ConjugateFamily P>
[[nodiscard]] double fit_score(const AnyFit<P>& fit);

/// Ties resolve to the smallest ordering index; the result does not depend
/// on the thread count.
template <ConjugateFamily P>
[[nodiscard]] OrderingResult<P> search_orderings(
    const Dataset& data, const P& prior, const EngineSpec& engine,
    const OrderingSearchConfig& cfg);

extern template double fit_score(const AnyFit<NigParams>&);
extern template double fit_score(const AnyFit<NiwParams>&);
extern template OrderingResult<NigParams> search_orderings(
    const Dataset&, const NigParams&, const EngineSpec&,
    const OrderingSearchConfig&);
extern template OrderingResult<NiwParams> search_orderings(
    const Dataset&, const NiwParams&, const EngineSpec&,
    const OrderingSearchConfig&);

} // namespace dpmseq
