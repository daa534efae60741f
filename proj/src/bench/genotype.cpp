#include "dpmseq/bench/genotype.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace dpmseq::bench {

namespace {

double class_log_density(const AnyFit<NiwParams>& fit, Observation y) {
  return std::visit([&](const auto& f) { return log_predictive_density(f, y); },
                    fit);
}

} // namespace

ThreeClassResult three_class_fit(const Dataset& data,
                                 const std::array<NiwParams, 3>& priors,
                                 double alpha, std::size_t trunc,
                                 GenotypeEngine engine) {
  if (data.size() == 0) throw std::invalid_argument("three_class_fit: no data");
  for (const auto& p : priors)
    if (p.dim() != data.dim())
      throw std::invalid_argument("three_class_fit: prior dimension mismatch");

  ThreeClassResult out;
  for (std::size_t a = 0; a < 3; ++a)
    for (std::size_t b = a + 1; b < 3; ++b)
      if (priors[a] == priors[b])
        out.warnings.push_back("classes " + std::to_string(a) + " and " +
                               std::to_string(b) +
                               " share a prior; labels are not identifiable");

  for (const auto& p : priors) {
    if (engine == GenotypeEngine::Sugs) {
      out.class_fits.emplace_back(SugsFit<NiwParams>(p, {alpha, std::nullopt}));
    } else {
      VsugsOptions o;
      o.alpha = alpha;
      o.trunc = trunc;
      o.keep_allocations = false;
      out.class_fits.emplace_back(VsugsFit<NiwParams>(p, o));
    }
  }

  const std::size_t n = data.size();
  out.responsibilities.resize(static_cast<Eigen::Index>(n), 3);
  out.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto y = data.row(i);
    std::array<double, 3> lr;
    for (std::size_t c = 0; c < 3; ++c)
      lr[c] = std::log(1.0 / 3.0) + class_log_density(out.class_fits[c], y);
    const double top = *std::max_element(lr.begin(), lr.end());
    if (!std::isfinite(top))
      throw NumericError("three_class_fit: every class density underflows");
    std::array<double, 3> r;
    double total = 0.0;
    for (std::size_t c = 0; c < 3; ++c) total += r[c] = std::exp(lr[c] - top);
    std::size_t best = 0;
    for (std::size_t c = 0; c < 3; ++c) {
      r[c] /= total;
      out.responsibilities(static_cast<Eigen::Index>(i),
                           static_cast<Eigen::Index>(c)) = r[c];
      if (r[c] > r[best]) best = c;
    }
    out.labels[i] = static_cast<int>(best);

    if (engine == GenotypeEngine::Sugs) {
      sugs_step(std::get<SugsFit<NiwParams>>(out.class_fits[best]), y);
    } else {
      for (std::size_t c = 0; c < 3; ++c)
        if (r[c] >= kMinUpdateWeight)
          vsugs_step(std::get<VsugsFit<NiwParams>>(out.class_fits[c]), y, r[c]);
    }
  }
  return out;
}

RowMatrix quantile_anchors(const Dataset& data) {
  const std::size_t n = data.size();
  if (n < 3) throw std::invalid_argument("quantile_anchors: need >= 3 rows");
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return data.row(a)[0] < data.row(b)[0];
  });
  RowMatrix anchors = RowMatrix::Zero(3, static_cast<Eigen::Index>(data.dim()));
  for (std::size_t c = 0; c < 3; ++c) {
    const std::size_t lo = c * n / 3, hi = (c + 1) * n / 3;
    for (std::size_t k = lo; k < hi; ++k)
      anchors.row(static_cast<Eigen::Index>(c)) +=
          data.values.row(static_cast<Eigen::Index>(idx[k]));
    anchors.row(static_cast<Eigen::Index>(c)) /= static_cast<double>(hi - lo);
  }
  return anchors;
}

std::array<NiwParams, 3> anchored_priors(const RowMatrix& anchors,
                                         const NiwParams& base) {
  if (anchors.rows() != 3 ||
      static_cast<std::size_t>(anchors.cols()) != base.dim())
    throw std::invalid_argument("anchored_priors: anchors must be 3 x d");
  auto make = [&](Eigen::Index c) {
    return NiwParams(anchors.row(c).transpose(), base.kappa(), base.psi(),
                     base.df());
  };
  return {make(0), make(1), make(2)};
}

RowMatrix normalize_two_channel(const RowMatrix& raw) {
  if (raw.cols() != 2)
    throw std::invalid_argument("normalize_two_channel: need 2 columns");
  if ((raw.array() <= 0.0).any() || !raw.allFinite())
    throw std::invalid_argument(
        "normalize_two_channel: values must be positive and finite");
  const Eigen::Index n = raw.rows();
  RowMatrix logged = raw.array().log() / std::log(2.0);
  std::array<std::vector<Eigen::Index>, 2> order;
  for (Eigen::Index c = 0; c < 2; ++c) {
    auto& o = order[static_cast<std::size_t>(c)];
    o.resize(static_cast<std::size_t>(n));
    std::iota(o.begin(), o.end(), Eigen::Index{0});
    std::stable_sort(o.begin(), o.end(), [&](Eigen::Index a, Eigen::Index b) {
      return logged(a, c) < logged(b, c);
    });
  }
  RowMatrix out(n, 2);
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto i0 = order[0][static_cast<std::size_t>(k)];
    const auto i1 = order[1][static_cast<std::size_t>(k)];
    const double m = 0.5 * (logged(i0, 0) + logged(i1, 1));
    out(i0, 0) = m;
    out(i1, 1) = m;
  }
  return out;
}

Dataset gen_genotype(const GenotypeSimSpec& spec) {
  if (spec.n < 1) throw std::invalid_argument("gen_genotype: n >= 1");
  std::mt19937_64 rng(spec.seed);
  std::uniform_int_distribution<int> cls(0, 2), blob(0, 1);
  std::normal_distribution<double> z(0.0, 1.0);
  RowMatrix v(static_cast<Eigen::Index>(spec.n), 2);
  std::vector<int> labels(spec.n);
  const double h = spec.blob_offset / std::sqrt(2.0);
  for (std::size_t i = 0; i < spec.n; ++i) {
    const int c = cls(rng);
    const double s = blob(rng) ? 1.0 : -1.0;
    const auto& ctr = spec.centers[static_cast<std::size_t>(c)];
    const auto r = static_cast<Eigen::Index>(i);
    v(r, 0) = ctr[0] + s * h + spec.blob_sd * z(rng);
    v(r, 1) = ctr[1] + s * h + spec.blob_sd * z(rng);
    labels[i] = c;
  }
  return Dataset(std::move(v), std::move(labels));
}

RowMatrix true_centers(const GenotypeSimSpec& spec) {
  RowMatrix m(3, 2);
  for (Eigen::Index c = 0; c < 3; ++c)
    for (Eigen::Index k = 0; k < 2; ++k)
      m(c, k) = spec.centers[static_cast<std::size_t>(c)][static_cast<std::size_t>(k)];
  return m;
}

} // namespace dpmseq::bench
