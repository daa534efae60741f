#include "dpmseq/cli/run.hpp"

#include "dpmseq/bench/genotype.hpp"
#include "dpmseq/bench/grid.hpp"
#include "dpmseq/bench/metrics.hpp"
#include "dpmseq/bench/synthetic.hpp"
#include "dpmseq/cli/ingest.hpp"
#include "dpmseq/cli/model_io.hpp"
#include "dpmseq/gibbs.hpp"
#include "dpmseq/ordering.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace dpmseq::cli {

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string one_line(std::string s) {
  for (char& c : s)
    if (c == '\n' || c == '\r') c = ' ';
  while (!s.empty() && s.back() == ' ') s.pop_back();
  return s;
}

struct PriorFlags {
  double rho = bench::kBenchPrior.rho, nu = bench::kBenchPrior.nu,
         a = bench::kBenchPrior.a, b = bench::kBenchPrior.b;
  std::optional<double> kappa, df, psi;

  void add(CLI::App* app) {
    app->add_option("--prior-rho", rho, "Prior location");
    app->add_option("--prior-nu", nu, "Prior mean-scale factor");
    app->add_option("--prior-a", a, "Prior precision shape");
    app->add_option("--prior-b", b, "Prior precision rate");
    app->add_option("--prior-kappa", kappa, "NIW kappa (multivariate data)");
    app->add_option("--prior-df", df, "NIW degrees of freedom");
    app->add_option("--prior-psi", psi, "NIW scale matrix psi = value * I");
  }
  [[nodiscard]] NigParams nig() const {
    NigParams p{rho, nu, a, b};
    p.validate();
    return p;
  }
  [[nodiscard]] NiwParams niw(std::size_t d) const {
    const NiwParams base = NiwParams::from_nig(rho, nu, a, b, d);
    Eigen::MatrixXd psi_m = base.psi();
    if (psi) psi_m = *psi * Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(d),
                                                      static_cast<Eigen::Index>(d));
    return NiwParams(base.mean(), kappa.value_or(base.kappa()), psi_m,
                     df.value_or(base.df()));
  }
};

struct InputFlags {
  std::string path;
  bool header = false, no_header = false, labels = false;

  void add(CLI::App* app, bool required) {
    auto* o = app->add_option("--input", path, "Comma-delimited data file");
    if (required) o->required();
    app->add_flag("--header", header, "First data line is a header");
    app->add_flag("--no-header", no_header, "Never treat a line as a header");
    app->add_flag("--labels", labels, "Last column holds integer labels");
  }
  [[nodiscard]] Dataset load() const {
    IngestOptions o;
    if (header) o.header = true;
    if (no_header) o.header = false;
    if (labels) o.label_column = true;
    return ingest(path, o);
  }
};

struct Context {
  std::string invocation;
  std::string output_dir = ".";
  std::uint64_t seed = 1;
  std::optional<std::size_t> threads;

  [[nodiscard]] std::string comment() const {
    return invocation + " (seed=" + std::to_string(seed) + ")";
  }
  [[nodiscard]] std::size_t thread_count() const {
    if (threads) return std::max<std::size_t>(1, *threads);
    if (const char* env = std::getenv("DPM_SEQ_THREADS")) {
      char* end = nullptr;
      const long v = std::strtol(env, &end, 10);
      if (end != env && *end == '\0' && v >= 1) return static_cast<std::size_t>(v);
    }
    return 1;
  }
  [[nodiscard]] std::ofstream open(const std::string& name) const {
    std::filesystem::path dir(output_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    const auto path = dir / name;
    std::ofstream f(path);
    if (!f) throw IoError("cannot write '" + path.string() + "'");
    return f;
  }
};

struct FitFlags {
  std::string engine = "vsugs";
  double alpha = 1.0;
  std::optional<std::size_t> trunc;
  std::size_t orderings = 0;
  std::string mode = "soft";

  void add(CLI::App* app, bool allow_gibbs) {
    app->add_option("--engine", engine, "sugs | vsugs" +
                                             std::string(allow_gibbs ? " | gibbs" : ""))
        ->check(allow_gibbs ? CLI::IsMember({"sugs", "vsugs", "gibbs"})
                            : CLI::IsMember({"sugs", "vsugs"}));
    app->add_option("--alpha", alpha, "DP concentration");
    app->add_option("--trunc", trunc, "Truncation level (required for vsugs)");
    app->add_option("--orderings", orderings,
                    "Random orderings to search (0 keeps the input order)");
    app->add_option("--mode", mode, "VSUGS allocation: soft | hard")
        ->check(CLI::IsMember({"soft", "hard"}));
  }
  void check() const {
    if (engine == "vsugs" && !trunc)
      throw UsageError("--trunc is required for --engine vsugs");
  }
  [[nodiscard]] EngineSpec spec() const {
    if (engine == "sugs") return SugsOptions{alpha, trunc};
    VsugsOptions o;
    o.alpha = alpha;
    o.trunc = *trunc;
    o.mode = mode == "hard" ? AllocationMode::Hard : AllocationMode::Soft;
    return o;
  }
};

template <ConjugateFamily P>
std::pair<AnyFit<P>, OrderingInfo> fit_model(const Dataset& data, const P& prior,
                                             const FitFlags& f,
                                             const Context& ctx) {
  const EngineSpec spec = f.spec();
  OrderingInfo info;
  info.seed = ctx.seed;
  info.num_orderings = f.orderings;
  if (f.orderings == 0) {
    info.permutation.resize(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) info.permutation[i] = i;
    if (const auto* s = std::get_if<SugsOptions>(&spec))
      return {AnyFit<P>(sugs_fit(data, prior, *s)), info};
    return {AnyFit<P>(vsugs_fit(data, prior, std::get<VsugsOptions>(spec))),
            info};
  }
  OrderingSearchConfig oc;
  oc.num_orderings = f.orderings;
  oc.seed = ctx.seed;
  oc.threads = ctx.thread_count();
  auto res = search_orderings(data, prior, spec, oc);
  info.best_index = res.best_index;
  info.permutation = res.best_permutation;
  return {std::move(res.best_fit), info};
}

template <ConjugateFamily P>
double fit_density(const AnyFit<P>& fit, Observation y) {
  return std::visit([&](const auto& f) { return predictive_density(f, y); }, fit);
}

std::vector<double> grid_points(double lo, double hi, std::size_t steps) {
  if (steps < 2) throw UsageError("--grid-steps must be >= 2");
  if (!(hi > lo)) throw UsageError("--grid-max must exceed --grid-min");
  std::vector<double> ys(steps);
  for (std::size_t k = 0; k < steps; ++k)
    ys[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(steps - 1);
  return ys;
}

// gen

struct GenCmd {
  double dmu = 0.0;
  std::size_t n = 500;
  std::string scale = "variance";
  std::string output = "data.csv";

  void add(CLI::App* app) {
    app->add_option("--dmu", dmu, "Component separation")->required();
    app->add_option("--n", n, "Sample size");
    app->add_option("--scale", scale, "variance | sd")
        ->check(CLI::IsMember({"variance", "sd"}));
    app->add_option("--output", output, "File name inside --output-dir");
  }
  void exec(const Context& ctx, std::ostream& out, std::ostream& err) const {
    bench::SyntheticSpec spec{dmu, n, ctx.seed,
                              scale == "sd" ? bench::ScaleConvention::StdDev
                                            : bench::ScaleConvention::Variance};
    if (!spec.in_reference_range())
      err << "warning: dmu outside [0, 5]\n";
    const Dataset d = bench::gen_mixture(spec);
    auto f = ctx.open(output);
    f << "# " << ctx.comment() << "\ny,label\n";
    for (std::size_t i = 0; i < d.size(); ++i)
      f << fmt17(d.row(i)[0]) << ',' << d.labels[i] << '\n';
    out << "wrote " << d.size() << " rows to " << output << '\n';
  }
};

// fit

struct FitCmd {
  InputFlags input;
  FitFlags fit;
  PriorFlags prior;
  std::string output = "model.json";

  void add(CLI::App* app) {
    input.add(app, true);
    fit.add(app, false);
    prior.add(app);
    app->add_option("--output", output, "File name inside --output-dir");
  }
  void exec(const Context& ctx, std::ostream& out) const {
    fit.check();
    const Dataset data = input.load();
    nlohmann::json j;
    if (data.dim() == 1) {
      auto [model, info] = fit_model(data, prior.nig(), fit, ctx);
      j = model_to_json<NigParams>(model, info);
    } else {
      auto [model, info] = fit_model(data, prior.niw(data.dim()), fit, ctx);
      j = model_to_json<NiwParams>(model, info);
    }
    auto f = ctx.open(output);
    write_model(f, j, ctx.comment());
    out << "engine=" << fit.engine << " clusters=" << j["clusters"].size();
    if (j.contains("lower_bound"))
      out << " lower_bound=" << fmt17(j["lower_bound"].get<double>());
    if (j.contains("log_pseudo_marginal"))
      out << " log_pseudo_marginal="
          << fmt17(j["log_pseudo_marginal"].get<double>());
    out << '\n';
  }
};

// density

struct DensityCmd {
  std::string model;
  InputFlags input;
  FitFlags fit;
  PriorFlags prior;
  std::size_t burnin = 300, iters = 1000;
  double lo = -5.0, hi = 5.0;
  std::size_t steps = 201;
  std::string output = "density.csv";

  void add(CLI::App* app) {
    app->add_option("--model", model, "Model dump written by fit");
    input.add(app, false);
    fit.add(app, true);
    prior.add(app);
    app->add_option("--burnin", burnin, "Gibbs burn-in sweeps");
    app->add_option("--iters", iters, "Gibbs retained sweeps");
    app->add_option("--grid-min", lo, "Lowest grid point");
    app->add_option("--grid-max", hi, "Highest grid point");
    app->add_option("--grid-steps", steps, "Number of grid points");
    app->add_option("--output", output, "File name inside --output-dir");
  }
  void exec(const Context& ctx, std::ostream& out) const {
    const auto ys = grid_points(lo, hi, steps);
    std::function<double(double)> f;
    std::optional<LoadedModel> loaded;
    std::optional<GibbsPredictive<NigParams>> gibbs;
    std::optional<AnyFit<NigParams>> fitted;
    Dataset data;
    if (!model.empty()) {
      std::ifstream in(model);
      if (!in) throw IoError("cannot open '" + model + "'");
      loaded = LoadedModel::from_json(read_model(in));
      if (loaded->dim() != 1) throw UsageError("density grids need 1-d models");
      f = [&](double y) { return loaded->density(Observation(&y, 1)); };
    } else if (!input.path.empty()) {
      data = input.load();
      if (data.dim() != 1) throw UsageError("density grids need 1-d data");
      if (fit.engine == "gibbs") {
        GibbsConfig cfg{burnin, iters, 1, ctx.seed};
        const auto samples =
            collapsed_gibbs(data, prior.nig(), fit.alpha, fit.trunc, cfg);
        gibbs.emplace(samples, data, prior.nig(), fit.alpha, fit.trunc);
        f = [&](double y) { return gibbs->density(Observation(&y, 1)); };
      } else {
        fit.check();
        fitted.emplace(fit_model(data, prior.nig(), fit, ctx).first);
        f = [&](double y) { return fit_density(*fitted, Observation(&y, 1)); };
      }
    } else {
      throw UsageError("density needs --model or --input");
    }
    auto file = ctx.open(output);
    file << "# " << ctx.comment() << "\ny,density\n";
    for (double y : ys) file << fmt17(y) << ',' << fmt17(f(y)) << '\n';
    out << "wrote " << ys.size() << " grid points to " << output << '\n';
  }
};

// compare

struct CompareCmd {
  InputFlags input;
  PriorFlags prior;
  std::optional<double> dmu;
  std::size_t n = 500;
  double alpha = 0.1;
  std::size_t trunc = 150, orderings = 50, burnin = 300, iters = 1000;
  std::string output = "compare.csv";

  void add(CLI::App* app) {
    input.add(app, false);
    prior.add(app);
    app->add_option("--dmu", dmu, "Generate synthetic data with this separation");
    app->add_option("--n", n, "Synthetic sample size");
    app->add_option("--alpha", alpha, "DP concentration");
    app->add_option("--trunc", trunc, "VSUGS truncation level");
    app->add_option("--orderings", orderings, "Random orderings per engine");
    app->add_option("--burnin", burnin, "Gibbs burn-in sweeps");
    app->add_option("--iters", iters, "Gibbs retained sweeps");
    app->add_option("--output", output, "File name inside --output-dir");
  }
  void exec(const Context& ctx, std::ostream& out) const {
    Dataset data;
    if (!input.path.empty() && dmu)
      throw UsageError("compare takes either --input or --dmu, not both");
    if (!input.path.empty())
      data = input.load();
    else if (dmu)
      data = bench::gen_mixture({*dmu, n, ctx.seed});
    else
      throw UsageError("compare needs --input or --dmu");
    if (data.dim() != 1) throw UsageError("compare needs 1-d data");
    const NigParams p = prior.nig();

    std::vector<double> truth;
    if (dmu)
      for (std::size_t i = 0; i < data.size(); ++i)
        truth.push_back(bench::true_density(*dmu, data.row(i)[0]));

    auto eval = [&](auto&& dens) {
      std::vector<double> v(data.size());
      for (std::size_t i = 0; i < data.size(); ++i) v[i] = dens(data.row(i));
      return v;
    };
    GibbsConfig cfg{burnin, iters, 1, ctx.seed};
    const auto samples = collapsed_gibbs(data, p, alpha, std::nullopt, cfg);
    const GibbsPredictive<NigParams> gp(samples, data, p, alpha, std::nullopt);
    const auto ref = eval([&](Observation y) { return gp.density(y); });

    struct Row {
      std::string engine;
      std::size_t T;
      std::vector<double> values;
    };
    std::vector<Row> rows;
    for (const char* e : {"sugs", "vsugs"}) {
      FitFlags ff;
      ff.engine = e;
      ff.alpha = alpha;
      if (ff.engine == "vsugs") ff.trunc = trunc;
      ff.orderings = orderings;
      const auto fit = fit_model(data, p, ff, ctx).first;
      rows.push_back({e, ff.engine == "vsugs" ? trunc : 0,
                      eval([&](Observation y) { return fit_density(fit, y); })});
    }
    rows.push_back({"gibbs", 0, ref});

    auto file = ctx.open(output);
    file << "# " << ctx.comment() << "\nengine,T,e,rel_err\n";
    for (const auto& r : rows) {
      const std::string e =
          truth.empty() ? "NA" : fmt17(bench::density_error(r.values, truth));
      const std::string line = r.engine + ',' + std::to_string(r.T) + ',' + e +
                               ',' + fmt17(bench::relative_error(r.values, ref));
      file << line << '\n';
      out << line << '\n';
    }
  }
};

// bench

struct BenchCmd {
  std::vector<double> dmu, alpha;
  std::vector<std::string> engines{"sugs", "vsugs"};
  std::size_t replicates = 1, trunc = 200, orderings = 50, n = 500;
  std::size_t burnin = 300, iters = 1000;
  bool gibbs_reference = false, timing = false;
  PriorFlags prior;

  void add(CLI::App* app) {
    app->add_option("--dmu", dmu, "Separation values")->required();
    app->add_option("--alpha", alpha, "Concentration values")->required();
    app->add_option("--engines", engines, "Engines to run")
        ->check(CLI::IsMember({"sugs", "vsugs", "gibbs"}));
    app->add_option("--replicates", replicates, "Datasets per cell");
    app->add_option("--trunc", trunc, "VSUGS truncation level");
    app->add_option("--orderings", orderings, "Random orderings per fit");
    app->add_option("--n", n, "Sample size");
    app->add_option("--burnin", burnin, "Gibbs burn-in sweeps");
    app->add_option("--iters", iters, "Gibbs retained sweeps");
    app->add_flag("--gibbs-reference", gibbs_reference,
                  "Fit collapsed Gibbs for the rel_err column");
    app->add_flag("--timing", timing, "Fill the wall_ms column");
    prior.add(app);
  }
  void exec(const Context& ctx, std::ostream& out) const {
    bench::ExperimentGrid g;
    g.dmu_values = dmu;
    g.alpha_values = alpha;
    g.replicates = replicates;
    g.engines.clear();
    for (const auto& e : engines) g.engines.push_back(bench::parse_engine(e));
    g.trunc = trunc;
    g.orderings = orderings;
    g.n = n;
    g.prior = prior.nig();
    g.gibbs_reference = gibbs_reference;
    g.gibbs = GibbsConfig{burnin, iters, 1, ctx.seed};
    g.seed = ctx.seed;
    g.threads = ctx.thread_count();
    const auto res = bench::run_grid(g);
    {
      auto f = ctx.open("bench_rows.csv");
      f << "# " << ctx.comment() << '\n';
      bench::write_rows_csv(f, res.rows, timing);
    }
    {
      auto f = ctx.open("bench_cells.csv");
      f << "# " << ctx.comment() << '\n';
      bench::write_cells_csv(f, res.cells, timing);
    }
    std::size_t failures = 0;
    for (const auto& c : res.cells) failures += c.failures;
    out << "cells=" << res.cells.size() << " rows=" << res.rows.size()
        << " failures=" << failures << '\n';
  }
};

// genotype

struct GenotypeCmd {
  InputFlags input;
  PriorFlags prior;
  std::string engine = "vsugs";
  double alpha = 1.0;
  std::size_t trunc = 20;
  std::vector<double> anchors;
  bool normalize = false;
  std::string output = "genotype.csv";

  void add(CLI::App* app) {
    input.add(app, true);
    prior.add(app);
    app->add_option("--engine", engine, "sugs | vsugs")
        ->check(CLI::IsMember({"sugs", "vsugs"}));
    app->add_option("--alpha", alpha, "DP concentration per class");
    app->add_option("--trunc", trunc, "VSUGS truncation level per class");
    app->add_option("--anchors", anchors,
                    "Class centers, 3 x d values row by row");
    app->add_flag("--normalize", normalize,
                  "log2 and quantile-normalize 2-channel input first");
    app->add_option("--output", output, "File name inside --output-dir");
  }
  void exec(const Context& ctx, std::ostream& out, std::ostream& err) const {
    Dataset data = input.load();
    if (normalize) data.values = bench::normalize_two_channel(data.values);
    const std::size_t d = data.dim();
    RowMatrix anc;
    if (anchors.empty()) {
      anc = bench::quantile_anchors(data);
    } else {
      if (anchors.size() != 3 * d)
        throw UsageError("--anchors needs " + std::to_string(3 * d) + " values");
      anc.resize(3, static_cast<Eigen::Index>(d));
      std::copy(anchors.begin(), anchors.end(), anc.data());
    }
    const auto priors = bench::anchored_priors(anc, prior.niw(d));
    const auto res = bench::three_class_fit(
        data, priors, alpha, trunc,
        engine == "sugs" ? bench::GenotypeEngine::Sugs
                         : bench::GenotypeEngine::Vsugs);
    for (const auto& w : res.warnings) err << "warning: " << w << '\n';
    auto f = ctx.open(output);
    f << "# " << ctx.comment() << "\nlabel,r0,r1,r2\n";
    std::array<std::size_t, 3> counts{};
    for (std::size_t i = 0; i < data.size(); ++i) {
      const auto r = static_cast<Eigen::Index>(i);
      f << res.labels[i] << ',' << fmt17(res.responsibilities(r, 0)) << ','
        << fmt17(res.responsibilities(r, 1)) << ','
        << fmt17(res.responsibilities(r, 2)) << '\n';
      ++counts[static_cast<std::size_t>(res.labels[i])];
    }
    out << "class_counts=" << counts[0] << ',' << counts[1] << ',' << counts[2];
    if (data.has_labels())
      out << " concordance=" << fmt17(bench::concordance(res.labels, data.labels));
    out << '\n';
  }
};

} // namespace

int run(int argc, const char* const* argv, std::ostream& out,
        std::ostream& err) {
  Context ctx;
  ctx.invocation = "dpmseq";
  for (int i = 1; i < argc; ++i) ctx.invocation += std::string(" ") + argv[i];

  CLI::App app{"Sequential fitting for Dirichlet process mixtures", "dpmseq"};
  app.require_subcommand(1);
  app.add_option("--output-dir", ctx.output_dir, "Directory for artifacts");
  app.add_option("--seed", ctx.seed, "Seed for every random choice");
  app.add_option("--threads", ctx.threads,
                 "Worker threads (default: DPM_SEQ_THREADS or 1)");
  app.fallthrough();

  GenCmd gen;
  FitCmd fit;
  DensityCmd density;
  CompareCmd compare;
  BenchCmd bench_cmd;
  GenotypeCmd genotype;
  auto* s_gen = app.add_subcommand("gen", "Write a synthetic mixture sample");
  auto* s_fit = app.add_subcommand("fit", "Fit SUGS or VSUGS and dump the model");
  auto* s_density = app.add_subcommand("density", "Evaluate a predictive density on a grid");
  auto* s_compare = app.add_subcommand("compare", "Relative errors against collapsed Gibbs");
  auto* s_bench = app.add_subcommand("bench", "Density-estimation sweep");
  auto* s_geno = app.add_subcommand("genotype", "Three-class mixture labels");
  gen.add(s_gen);
  fit.add(s_fit);
  density.add(s_density);
  compare.add(s_compare);
  bench_cmd.add(s_bench);
  genotype.add(s_geno);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: usage: " << one_line(e.what()) << '\n';
    return 2;
  }

  try {
    if (s_gen->parsed()) gen.exec(ctx, out, err);
    else if (s_fit->parsed()) fit.exec(ctx, out);
    else if (s_density->parsed()) density.exec(ctx, out);
    else if (s_compare->parsed()) compare.exec(ctx, out);
    else if (s_bench->parsed()) bench_cmd.exec(ctx, out);
    else if (s_geno->parsed()) genotype.exec(ctx, out, err);
  } catch (const UsageError& e) {
    err << "error: usage: " << one_line(e.what()) << '\n';
    return 2;
  } catch (const IngestError& e) {
    err << "error: input: " << one_line(e.what()) << '\n';
    return 3;
  } catch (const IoError& e) {
    err << "error: io: " << one_line(e.what()) << '\n';
    return 3;
  } catch (const NumericError& e) {
    err << "error: numeric: " << one_line(e.what()) << '\n';
    return 4;
  } catch (const std::invalid_argument& e) {
    err << "error: invalid: " << one_line(e.what()) << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: runtime: " << one_line(e.what()) << '\n';
    return 1;
  }
  return 0;
}

} // namespace dpmseq::cli
