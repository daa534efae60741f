#pragma once

// Self-describing JSON model dumps.  A dump carries the prior, urn settings,
// per-cluster parameters and soft counts, so the predictive density can be
// evaluated after reloading without refitting.

#include "dpmseq/nig.hpp"
#include "dpmseq/niw.hpp"
#include "dpmseq/ordering.hpp"

#include <json.hpp>

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace dpmseq::cli {

inline constexpr const char* kModelSchema = "dpmseq.model/1";

struct OrderingInfo {
  std::uint64_t seed = 0;
  std::size_t num_orderings = 0; ///< 0 when the input order was used
  std::size_t best_index = 0;
  std::vector<std::size_t> permutation;
};

template <ConjugateFamily P>
[[nodiscard]] nlohmann::json model_to_json(const AnyFit<P>& fit,
                                           const OrderingInfo& ordering);

/// Predictive density rebuilt from a dump.
class LoadedModel {
public:
  static LoadedModel from_json(const nlohmann::json& j);

  [[nodiscard]] std::string engine() const { return engine_; }
  [[nodiscard]] std::size_t dim() const noexcept { return dim_; }
  [[nodiscard]] std::size_t num_clusters() const noexcept;
  [[nodiscard]] double log_density(Observation y) const;
  [[nodiscard]] double density(Observation y) const;
  [[nodiscard]] const nlohmann::json& raw() const noexcept { return raw_; }

private:
  nlohmann::json raw_;
  std::string engine_;
  std::size_t dim_ = 1;
  double alpha_ = 1.0;
  std::optional<std::size_t> trunc_;
  double mass_ = 0.0;
  std::vector<double> counts_;
  template <class K>
  struct Kernels {
    std::vector<K> clusters;
    std::vector<K> prior; // one entry
  };
  std::variant<Kernels<NigPredictiveKernel>, Kernels<NiwPredictiveKernel>>
      kernels_;
};

[[nodiscard]] nlohmann::json nig_to_json(const NigParams& p);
[[nodiscard]] NigParams nig_from_json(const nlohmann::json& j);
[[nodiscard]] nlohmann::json niw_to_json(const NiwParams& p);
[[nodiscard]] NiwParams niw_from_json(const nlohmann::json& j);

/// Writes "// <comment>\n" followed by the indented JSON.
void write_model(std::ostream& os, const nlohmann::json& j,
                 const std::string& comment);
/// Parses a dump, ignoring comments, and checks the schema tag.
[[nodiscard]] nlohmann::json read_model(std::istream& is);

} // namespace dpmseq::cli
