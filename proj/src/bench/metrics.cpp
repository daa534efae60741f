#include "dpmseq/bench/metrics.hpp"

#include <stdexcept>

namespace dpmseq::bench {

double density_error(std::span<const double> fhat,
                     std::span<const double> fref) {
  if (fhat.size() != fref.size())
    throw std::invalid_argument("density_error: length mismatch");
  double e = 0.0;
  for (std::size_t j = 0; j < fhat.size(); ++j) {
    const double d = fhat[j] - fref[j];
    e += d * d;
  }
  return e;
}

double relative_error(std::span<const double> fmethod,
                      std::span<const double> fref) {
  if (fmethod.size() != fref.size())
    throw std::invalid_argument("relative_error: length mismatch");
  double den = 0.0;
  for (double f : fref) den += f * f;
  if (!(den > 0.0))
    throw std::invalid_argument("relative_error: reference density is zero");
  return density_error(fmethod, fref) / den;
}

double concordance(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size())
    throw std::invalid_argument("concordance: length mismatch");
  if (a.empty()) throw std::invalid_argument("concordance: empty labels");
  std::size_t same = 0;
  for (std::size_t i = 0; i < a.size(); ++i) same += a[i] == b[i];
  return static_cast<double>(same) / static_cast<double>(a.size());
}

} // namespace dpmseq::bench
