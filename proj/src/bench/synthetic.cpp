#include "dpmseq/bench/synthetic.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace dpmseq::bench {

void SyntheticSpec::validate() const {
  if (n < 1) throw std::invalid_argument("gen_mixture: n must be >= 1");
  if (!std::isfinite(dmu)) throw std::invalid_argument("gen_mixture: dmu");
}

std::array<MixtureComponent, 3> mixture_components(double dmu,
                                                   ScaleConvention scale) {
  std::array<MixtureComponent, 3> c{{{0.4, -dmu, 0.25},
                                     {0.3, 0.0, 0.5},
                                     {0.3, dmu, 2.0}}};
  if (scale == ScaleConvention::StdDev)
    for (auto& m : c) m.variance *= m.variance;
  return c;
}

Dataset gen_mixture(const SyntheticSpec& spec) {
  spec.validate();
  const auto comps = mixture_components(spec.dmu, spec.scale);
  std::mt19937_64 rng(spec.seed);
  std::discrete_distribution<int> pick{comps[0].weight, comps[1].weight,
                                       comps[2].weight};
  std::normal_distribution<double> z(0.0, 1.0);
  RowMatrix v(static_cast<Eigen::Index>(spec.n), 1);
  std::vector<int> labels(spec.n);
  for (std::size_t i = 0; i < spec.n; ++i) {
    const int k = pick(rng);
    labels[i] = k;
    v(static_cast<Eigen::Index>(i), 0) =
        comps[k].mean + std::sqrt(comps[k].variance) * z(rng);
  }
  return Dataset(std::move(v), std::move(labels));
}

double true_density(double dmu, double y, ScaleConvention scale) {
  double f = 0.0;
  for (const auto& c : mixture_components(dmu, scale)) {
    const double d = y - c.mean;
    f += c.weight * std::exp(-0.5 * d * d / c.variance) /
         std::sqrt(2.0 * std::numbers::pi * c.variance);
  }
  return f;
}

double mixture_mean(double dmu, ScaleConvention scale) {
  double m = 0.0;
  for (const auto& c : mixture_components(dmu, scale)) m += c.weight * c.mean;
  return m;
}

double mixture_variance(double dmu, ScaleConvention scale) {
  const double m = mixture_mean(dmu, scale);
  double s = 0.0;
  for (const auto& c : mixture_components(dmu, scale))
    s += c.weight * (c.variance + (c.mean - m) * (c.mean - m));
  return s;
}

std::uint64_t stream_seed(std::uint64_t master, std::uint64_t a,
                          std::uint64_t b) noexcept {
  auto mix = [](std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  };
  return mix(mix(mix(master) ^ a) ^ (b * 0xd6e8feb86659fd93ULL));
}

} // namespace dpmseq::bench
