#include "dpmseq/bench/grid.hpp"

#include "dpmseq/bench/metrics.hpp"
#include "dpmseq/ordering.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <thread>

namespace dpmseq::bench {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fmt17(double x) {
  if (std::isnan(x)) return "NA";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

template <class F>
std::vector<double> evaluate(const Dataset& data, F&& f) {
  std::vector<double> out(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) out[i] = f(data.row(i));
  return out;
}

} // namespace

std::string engine_name(EngineKind e) {
  switch (e) {
  case EngineKind::Sugs: return "sugs";
  case EngineKind::Vsugs: return "vsugs";
  case EngineKind::Gibbs: return "gibbs";
  }
  return "?";
}

EngineKind parse_engine(const std::string& name) {
  if (name == "sugs") return EngineKind::Sugs;
  if (name == "vsugs") return EngineKind::Vsugs;
  if (name == "gibbs") return EngineKind::Gibbs;
  throw std::invalid_argument("unknown engine '" + name + "'");
}

void ExperimentGrid::validate() const {
  if (dmu_values.empty() || alpha_values.empty())
    throw std::invalid_argument("run_grid: empty grid axis");
  if (engines.empty()) throw std::invalid_argument("run_grid: no engines");
  if (replicates < 1) throw std::invalid_argument("run_grid: replicates >= 1");
  if (n < 1) throw std::invalid_argument("run_grid: n >= 1");
  if (orderings < 1) throw std::invalid_argument("run_grid: orderings >= 1");
  if (trunc < 1) throw std::invalid_argument("run_grid: trunc >= 1");
  for (double a : alpha_values)
    if (!(a > 0.0)) throw std::invalid_argument("run_grid: alpha must be > 0");
  prior.validate();
  gibbs.validate();
}

std::vector<ResultRow> run_replicate(const ExperimentGrid& grid,
                                     std::size_t cell, std::size_t replicate) {
  const double dmu = grid.dmu_values[cell / grid.alpha_values.size()];
  const double alpha = grid.alpha_values[cell % grid.alpha_values.size()];
  const std::uint64_t data_seed = stream_seed(grid.seed, cell, replicate);
  const Dataset data = gen_mixture({dmu, grid.n, data_seed, grid.scale});
  const auto truth = evaluate(data, [&](Observation y) {
    return true_density(dmu, y[0], grid.scale);
  });

  std::vector<ResultRow> rows;
  std::vector<std::vector<double>> fhat;
  std::vector<double> reference;
  bool reference_ok = false;

  const bool need_gibbs =
      grid.gibbs_reference ||
      std::find(grid.engines.begin(), grid.engines.end(), EngineKind::Gibbs) !=
          grid.engines.end();
  std::vector<EngineKind> order = grid.engines;
  if (need_gibbs &&
      std::find(order.begin(), order.end(), EngineKind::Gibbs) == order.end())
    order.push_back(EngineKind::Gibbs);

  for (EngineKind kind : order) {
    ResultRow row;
    row.dmu = dmu;
    row.alpha = alpha;
    row.engine = kind;
    row.replicate = replicate;
    row.seed = data_seed;
    row.rel_err = kNaN;
    row.e = kNaN;
    std::vector<double> values;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      if (kind == EngineKind::Gibbs) {
        GibbsConfig cfg = grid.gibbs;
        cfg.seed = stream_seed(data_seed, 3);
        const auto samples =
            collapsed_gibbs(data, grid.prior, alpha, std::nullopt, cfg);
        const GibbsPredictive<NigParams> pred(samples, data, grid.prior, alpha,
                                              std::nullopt);
        values = evaluate(data, [&](Observation y) { return pred.density(y); });
      } else {
        EngineSpec spec;
        if (kind == EngineKind::Sugs) {
          spec = SugsOptions{alpha, std::nullopt};
        } else {
          VsugsOptions o;
          o.alpha = alpha;
          o.trunc = grid.trunc;
          o.keep_allocations = false;
          spec = o;
          row.T = grid.trunc;
        }
        OrderingSearchConfig oc;
        oc.num_orderings = grid.orderings;
        oc.seed = stream_seed(data_seed, kind == EngineKind::Sugs ? 1 : 2);
        const auto res = search_orderings(data, grid.prior, spec, oc);
        row.best_ordering = res.best_index;
        values = std::visit(
            [&](const auto& fit) {
              return evaluate(data, [&](Observation y) {
                return predictive_density(fit, y);
              });
            },
            res.best_fit);
      }
      row.e = density_error(values, truth);
    } catch (const std::exception& ex) {
      row.error = ex.what();
      values.clear();
    }
    row.wall_ms = std::chrono::duration<double, std::milli>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
    if (kind == EngineKind::Gibbs && !values.empty()) {
      reference = values;
      reference_ok = true;
    }
    fhat.push_back(std::move(values));
    rows.push_back(std::move(row));
  }

  if (reference_ok) {
    for (std::size_t k = 0; k < rows.size(); ++k)
      if (!fhat[k].empty()) rows[k].rel_err = relative_error(fhat[k], reference);
  }
  // Drop the Gibbs row when it was only fitted as a reference.
  if (need_gibbs && std::find(grid.engines.begin(), grid.engines.end(),
                              EngineKind::Gibbs) == grid.engines.end())
    rows.pop_back();
  return rows;
}

GridResult run_grid(const ExperimentGrid& grid) {
  grid.validate();
  const std::size_t tasks = grid.num_cells() * grid.replicates;
  std::vector<std::vector<ResultRow>> per_task(tasks);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t t = next++; t < tasks; t = next++)
      per_task[t] = run_replicate(grid, t / grid.replicates, t % grid.replicates);
  };
  const std::size_t threads =
      std::max<std::size_t>(1, std::min(grid.threads, tasks));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
  }

  GridResult out;
  for (std::size_t cell = 0; cell < grid.num_cells(); ++cell) {
    CellSummary s;
    s.dmu = grid.dmu_values[cell / grid.alpha_values.size()];
    s.alpha = grid.alpha_values[cell % grid.alpha_values.size()];
    s.engines = grid.engines;
    const std::size_t m = grid.engines.size();
    s.mean_e.assign(m, 0.0);
    s.mean_rel_err.assign(m, 0.0);
    s.mean_wall_ms.assign(m, 0.0);
    std::vector<std::size_t> ok(m, 0);
    double log_ratio = 0.0;
    std::size_t ratio_count = 0;
    for (std::size_t r = 0; r < grid.replicates; ++r) {
      const auto& rows = per_task[cell * grid.replicates + r];
      double e_sugs = kNaN, e_vsugs = kNaN;
      for (std::size_t k = 0; k < rows.size(); ++k) {
        const auto& row = rows[k];
        out.rows.push_back(row);
        if (!row.error.empty()) {
          ++s.failures;
          continue;
        }
        ++ok[k];
        s.mean_e[k] += row.e;
        s.mean_rel_err[k] += row.rel_err;
        s.mean_wall_ms[k] += row.wall_ms;
        if (row.engine == EngineKind::Sugs) e_sugs = row.e;
        if (row.engine == EngineKind::Vsugs) e_vsugs = row.e;
      }
      if (std::isfinite(e_sugs) && std::isfinite(e_vsugs) && e_sugs > 0.0 &&
          e_vsugs > 0.0) {
        log_ratio += std::log(e_sugs / e_vsugs);
        ++ratio_count;
      }
    }
    for (std::size_t k = 0; k < m; ++k) {
      const double c = ok[k] ? static_cast<double>(ok[k]) : kNaN;
      s.mean_e[k] /= c;
      s.mean_rel_err[k] /= c;
      s.mean_wall_ms[k] /= c;
    }
    s.mean_log_ratio =
        ratio_count ? log_ratio / static_cast<double>(ratio_count) : kNaN;
    out.cells.push_back(std::move(s));
  }
  return out;
}

void write_rows_csv(std::ostream& os, const std::vector<ResultRow>& rows,
                    bool include_timing) {
  os << "dmu,alpha,engine,T,replicate,e,rel_err,wall_ms,seed\n";
  for (const auto& r : rows) {
    os << fmt17(r.dmu) << ',' << fmt17(r.alpha) << ',' << engine_name(r.engine)
       << ',' << r.T << ',' << r.replicate << ',' << fmt17(r.e) << ','
       << fmt17(r.rel_err) << ',' << (include_timing ? fmt17(r.wall_ms) : "NA")
       << ',' << r.seed << '\n';
  }
}

void write_cells_csv(std::ostream& os, const std::vector<CellSummary>& cells,
                     bool include_timing) {
  os << "dmu,alpha,engine,mean_e,mean_rel_err,mean_wall_ms,log_ratio,failures\n";
  for (const auto& c : cells)
    for (std::size_t k = 0; k < c.engines.size(); ++k)
      os << fmt17(c.dmu) << ',' << fmt17(c.alpha) << ','
         << engine_name(c.engines[k]) << ',' << fmt17(c.mean_e[k]) << ','
         << fmt17(c.mean_rel_err[k]) << ','
         << (include_timing ? fmt17(c.mean_wall_ms[k]) : "NA") << ','
         << fmt17(c.mean_log_ratio) << ',' << c.failures << '\n';
}

} // namespace dpmseq::bench
