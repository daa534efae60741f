#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

namespace dpmseq {

using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// A single observation: a contiguous view of d values.
using Observation = std::span<const double>;

/// Raised when a computation leaves the representable range (underflow of
/// every predictive, loss of positive-definiteness, non-finite results).
class NumericError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Ordered N x d matrix of observations with optional integer labels.
struct Dataset {
  RowMatrix values;
  std::vector<int> labels; // empty when unlabeled

  Dataset() = default;
  explicit Dataset(RowMatrix v, std::vector<int> l = {})
      : values(std::move(v)), labels(std::move(l)) {
    if (!labels.empty() && labels.size() != size())
      throw std::invalid_argument("Dataset: label count does not match rows");
  }

  /// Univariate dataset from a plain vector.
  static Dataset from_values(std::span<const double> ys) {
    RowMatrix m(static_cast<Eigen::Index>(ys.size()), 1);
    for (std::size_t i = 0; i < ys.size(); ++i)
      m(static_cast<Eigen::Index>(i), 0) = ys[i];
    return Dataset(std::move(m));
  }

  [[nodiscard]] std::size_t size() const noexcept {
    return static_cast<std::size_t>(values.rows());
  }
  [[nodiscard]] std::size_t dim() const noexcept {
    return static_cast<std::size_t>(values.cols());
  }
  [[nodiscard]] bool has_labels() const noexcept { return !labels.empty(); }

  [[nodiscard]] Observation row(std::size_t i) const noexcept {
    return {values.data() + i * dim(), dim()};
  }

  /// Rows reordered so that row k of the result is row order[k] of this.
  [[nodiscard]] Dataset permuted(std::span<const std::size_t> order) const {
    if (order.size() != size())
      throw std::invalid_argument("Dataset::permuted: wrong permutation size");
    RowMatrix out(values.rows(), values.cols());
    std::vector<int> lab;
    if (has_labels()) lab.resize(size());
    for (std::size_t k = 0; k < order.size(); ++k) {
      out.row(static_cast<Eigen::Index>(k)) =
          values.row(static_cast<Eigen::Index>(order[k]));
      if (has_labels()) lab[k] = labels[order[k]];
    }
    return Dataset(std::move(out), std::move(lab));
  }
};

/// Probability vector over cluster labels 0..L-1 for one observation.
struct AllocationDistribution {
  std::vector<double> probs;

  [[nodiscard]] std::size_t size() const noexcept { return probs.size(); }
  [[nodiscard]] double operator[](std::size_t j) const { return probs[j]; }
  [[nodiscard]] double sum() const noexcept {
    return std::accumulate(probs.begin(), probs.end(), 0.0);
  }
  /// First index of the largest entry.
  [[nodiscard]] std::size_t argmax() const noexcept {
    std::size_t best = 0;
    for (std::size_t j = 1; j < probs.size(); ++j)
      if (probs[j] > probs[best]) best = j;
    return best;
  }
};

} // namespace dpmseq
