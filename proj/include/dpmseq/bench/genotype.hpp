#pragma once

// Three-class hierarchical model: fixed equal class weights, and each class
// density is its own DP mixture of multivariate normals fitted sequentially.

#include "dpmseq/niw.hpp"
#include "dpmseq/ordering.hpp"
#include "dpmseq/types.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace dpmseq::bench {

enum class GenotypeEngine { Sugs, Vsugs };

struct ThreeClassResult {
  std::vector<AnyFit<NiwParams>> class_fits; ///< always 3 entries
  RowMatrix responsibilities;                ///< N x 3, rows sum to 1
  std::vector<int> labels;                   ///< argmax of each row
  std::vector<std::string> warnings;
};

/// Processes the rows in order.  Responsibilities are proportional to
/// (1/3) times each class predictive before the point is absorbed.  The
/// VSUGS variant feeds the point to every class with weight r_c; the SUGS
/// variant adds it to the argmax class only.  `trunc` bounds each class
/// mixture for VSUGS; SUGS classes are untruncated.
[[nodiscard]] ThreeClassResult three_class_fit(
    const Dataset& data, const std::array<NiwParams, 3>& priors, double alpha,
    std::size_t trunc, GenotypeEngine engine);

/// Means of the lower, middle and upper thirds of the rows ranked by the
/// first coordinate (3 x d).
[[nodiscard]] RowMatrix quantile_anchors(const Dataset& data);

/// Copies of `base` with the mean moved to each anchor row.
[[nodiscard]] std::array<NiwParams, 3> anchored_priors(const RowMatrix& anchors,
                                                       const NiwParams& base);

/// log2 of both channels followed by quantile normalization across the two
/// columns.  Requires an N x 2 matrix of positive values.
[[nodiscard]] RowMatrix normalize_two_channel(const RowMatrix& raw);

/// Synthetic 2-d three-class data: each class is an equal mixture of two
/// normal blobs around its center.  Labels hold the class (0, 1, 2).
struct GenotypeSimSpec {
  std::size_t n = 3000;
  std::uint64_t seed = 0;
  std::array<std::array<double, 2>, 3> centers{{{-4.0, 0.0}, {0.0, 0.0}, {4.0, 0.0}}};
  double blob_offset = 0.8; ///< each blob sits this far from the center
  double blob_sd = 0.35;
};
[[nodiscard]] Dataset gen_genotype(const GenotypeSimSpec& spec);
[[nodiscard]] RowMatrix true_centers(const GenotypeSimSpec& spec);

} // namespace dpmseq::bench
