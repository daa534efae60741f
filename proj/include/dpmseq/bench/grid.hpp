#pragma once

// Density-estimation sweep over (dmu, alpha) cells.  Every replicate draws a
// fresh synthetic dataset, fits each engine (best of a set of random
// orderings for SUGS and VSUGS), and scores the predictive density at the
// data points against the true density and, optionally, a collapsed Gibbs
// reference.

#include "dpmseq/bench/synthetic.hpp"
#include "dpmseq/gibbs.hpp"
#include "dpmseq/nig.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace dpmseq::bench {

/// Default base measure of the density benchmarks and the command line.
inline constexpr NigParams kBenchPrior{0.0, 1.0, 2.0, 1.0};

enum class EngineKind { Sugs, Vsugs, Gibbs };

[[nodiscard]] std::string engine_name(EngineKind e);
[[nodiscard]] EngineKind parse_engine(const std::string& name);

struct ExperimentGrid {
  std::vector<double> dmu_values;
  std::vector<double> alpha_values;
  std::size_t replicates = 1;
  std::vector<EngineKind> engines{EngineKind::Sugs, EngineKind::Vsugs};
  std::size_t trunc = 200;
  std::size_t orderings = 50;
  std::size_t n = 500;
  NigParams prior = kBenchPrior;
  ScaleConvention scale = ScaleConvention::Variance;
  /// Fit collapsed Gibbs as the reference for rel_err even when it is not
  /// listed in `engines`.
  bool gibbs_reference = false;
  GibbsConfig gibbs{};
  std::uint64_t seed = 0;
  std::size_t threads = 1;

  void validate() const;
  [[nodiscard]] std::size_t num_cells() const noexcept {
    return dmu_values.size() * alpha_values.size();
  }
};

struct ResultRow {
  double dmu = 0.0;
  double alpha = 0.0;
  EngineKind engine = EngineKind::Sugs;
  std::size_t T = 0; ///< 0 for untruncated engines
  std::size_t replicate = 0;
  double e = 0.0;       ///< squared error against the true density
  double rel_err = 0.0; ///< against the Gibbs reference; NaN without one
  double wall_ms = 0.0;
  std::uint64_t seed = 0; ///< data seed of the replicate
  std::size_t best_ordering = 0; ///< winning ordering index (SUGS, VSUGS)
  std::string error;      ///< nonempty when the fit failed
};

struct CellSummary {
  double dmu = 0.0;
  double alpha = 0.0;
  std::vector<EngineKind> engines;
  std::vector<double> mean_e;
  std::vector<double> mean_rel_err;
  std::vector<double> mean_wall_ms;
  /// Mean over replicates of log(e_SUGS / e_VSUGS); NaN unless both ran.
  double mean_log_ratio = 0.0;
  std::size_t failures = 0;
};

struct GridResult {
  std::vector<ResultRow> rows;
  std::vector<CellSummary> cells;
};

/// Rows for one replicate of one cell; the dataset seed is keyed on
/// (grid.seed, cell, replicate).
[[nodiscard]] std::vector<ResultRow> run_replicate(const ExperimentGrid& grid,
                                                   std::size_t cell,
                                                   std::size_t replicate);

[[nodiscard]] GridResult run_grid(const ExperimentGrid& grid);

/// Columns: dmu, alpha, engine, T, replicate, e, rel_err, wall_ms, seed.
void write_rows_csv(std::ostream& os, const std::vector<ResultRow>& rows,
                    bool include_timing = true);
void write_cells_csv(std::ostream& os, const std::vector<CellSummary>& cells,
                     bool include_timing = true);

} // namespace dpmseq::bench
