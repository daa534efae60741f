#include "dpmseq/sugs.hpp"
#include "dpmseq/vsugs.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <random>

using namespace dpmseq;

namespace {

Dataset univariate(std::vector<double> ys) { return Dataset::from_values(ys); }

std::vector<double> mixture_sample(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<> z(0.0, 1.0);
  std::vector<double> ys(n);
  for (auto& y : ys) y = z(rng) + 4.0 * static_cast<double>(rng() % 3) - 4.0;
  return ys;
}

VsugsOptions opts(double alpha, std::size_t trunc,
                  AllocationMode mode = AllocationMode::Soft) {
  VsugsOptions o;
  o.alpha = alpha;
  o.trunc = trunc;
  o.mode = mode;
  return o;
}

} // namespace

TEST_SUITE("vsugs") {
  TEST_CASE("first observation is allocated to label 0 with certainty") {
    VsugsFit<NigParams> fit(NigParams{}, opts(1.0, 5));
    const double y = 0.3;
    const auto q = vsugs_allocate(fit.state, Observation(&y, 1));
    REQUIRE(q.size() == 1);
    CHECK(q[0] == 1.0);
    CHECK(vsugs_step(fit, Observation(&y, 1)).probs == std::vector<double>{1.0});
  }

  TEST_CASE("a distant second point puts more mass on a new label") {
    VsugsFit<NigParams> fit(NigParams{}, opts(1.0, 10));
    const double y1 = 0.0, y2 = 10.0;
    vsugs_step(fit, Observation(&y1, 1));
    const auto q = vsugs_allocate(fit.state, Observation(&y2, 1));
    REQUIRE(q.size() == 2);
    CHECK(q[1] > q[0]);
  }

  TEST_CASE("with T = 1 every allocation is the single label") {
    const auto fit = vsugs_fit(univariate(mixture_sample(60, 1)), NigParams{},
                               opts(3.0, 1));
    for (const auto& q : fit.allocations) CHECK(q.probs == std::vector<double>{1.0});
  }

  TEST_CASE("with T = 1 the fit is the exact pooled posterior") {
    const auto ys = mixture_sample(40, 2);
    const NigParams prior{0.1, 2.0, 1.5, 0.5};
    const auto fit = vsugs_fit(univariate(ys), prior, opts(1.0, 1));
    const auto want = oracle::batch_nig({0.1, 2.0, 1.5, 0.5}, ys);
    const auto& got = fit.state.clusters[0];
    CHECK(got.rho == doctest::Approx(want.rho).epsilon(1e-12));
    CHECK(got.nu == doctest::Approx(want.nu).epsilon(1e-12));
    CHECK(got.a == doctest::Approx(want.a).epsilon(1e-12));
    CHECK(got.b == doctest::Approx(want.b).epsilon(1e-12));
    for (double y : {-3.0, 0.0, 2.5})
      CHECK(predictive_density(fit, Observation(&y, 1)) ==
            doctest::Approx(oracle::nig_predictive(want, y)).epsilon(1e-12));
    CHECK(fit.state.lower_bound ==
          doctest::Approx(oracle::nig_log_marginal({0.1, 2.0, 1.5, 0.5}, ys))
              .epsilon(1e-10));
  }

  TEST_CASE("single exact step bound equals the log predictive") {
    const NigParams prev{0.2, 1.3, 2.0, 0.9};
    const double y = 1.7;
    const auto next = nig_weighted_update(prev, y, 1.0);
    const std::vector<NigParams> a{prev}, b{next};
    const AllocationDistribution one{{1.0}};
    const double lb = step_lower_bound<NigParams>(a, b, one, one, Observation(&y, 1));
    CHECK(lb == doctest::Approx(nig_log_predictive(prev, y)).epsilon(1e-12));
    CHECK(std::abs(lb - nig_log_predictive(prev, y)) < 1e-8);
  }

  TEST_CASE("printed bound form is not tight") {
    const NigParams prev{0.2, 1.3, 2.0, 0.9};
    const double y = 1.7;
    const auto next = nig_weighted_update(prev, y, 1.0);
    const std::vector<NigParams> a{prev}, b{next};
    const AllocationDistribution one{{1.0}};
    const double lb = step_lower_bound<NigParams>(a, b, one, one, Observation(&y, 1),
                                                  BoundForm::Printed);
    CHECK(std::abs(lb - nig_log_predictive(prev, y)) > 1e-3);
  }

  TEST_CASE("unchanged parameters with degenerate allocations leave only the "
            "expected log-likelihood") {
    const NigParams p{0.0, 1.0, 2.0, 1.5};
    const std::vector<NigParams> ps{p, p};
    const double y = 0.4;
    const AllocationDistribution q{{1.0, 0.0}};
    const double lb = step_lower_bound<NigParams>(ps, ps, q, q, Observation(&y, 1));
    CHECK(lb == doctest::Approx(nig_expected_loglik(p, y)).epsilon(1e-14));
  }

  TEST_CASE("step bound rejects inconsistent lengths") {
    const std::vector<NigParams> a{NigParams{}}, b{NigParams{}, NigParams{}};
    const AllocationDistribution q{{1.0}};
    const double y = 0.0;
    CHECK_THROWS_AS((void)step_lower_bound<NigParams>(a, b, q, q, Observation(&y, 1)),
                    std::invalid_argument);
  }

  TEST_CASE("normalization, occupancy and entropy after every step") {
    const auto ys = mixture_sample(300, 3);
    VsugsFit<NigParams> fit(NigParams{}, opts(2.0, 8));
    std::vector<double> prev;
    for (std::size_t i = 0; i < ys.size(); ++i) {
      const auto q = vsugs_step(fit, Observation(&ys[i], 1));
      CHECK(q.sum() == doctest::Approx(1.0).epsilon(1e-12));
      double h = 0.0;
      for (double p : q.probs) {
        CHECK(p >= 0.0);
        if (p > 0.0) h -= p * std::log(p);
      }
      CHECK(h >= 0.0);
      CHECK(h <= std::log(8.0) + 1e-12);
      CHECK(fit.state.mass() == doctest::Approx(static_cast<double>(i + 1)).epsilon(1e-9));
      CHECK(fit.state.soft_counts.size() == std::min<std::size_t>(i + 1, 8));
      for (std::size_t j = 0; j < prev.size(); ++j)
        CHECK(fit.state.soft_counts[j] >= prev[j]);
      prev = fit.state.soft_counts;
      CHECK(std::isfinite(fit.state.lower_bound));
    }
    // soft counts equal the column sums of the stored allocations
    std::vector<double> col(8, 0.0);
    for (const auto& q : fit.allocations)
      for (std::size_t j = 0; j < q.size(); ++j) col[j] += q[j];
    for (std::size_t j = 0; j < 8; ++j)
      CHECK(col[j] == doctest::Approx(fit.state.soft_counts[j]).epsilon(1e-9));
  }

  TEST_CASE("hard allocations reproduce truncated SUGS") {
    for (std::uint64_t seed = 10; seed < 20; ++seed) {
      const auto ys = mixture_sample(150, seed);
      const NigParams prior{0, 1, 1, 1};
      const std::size_t T = 2 + seed % 5;
      const auto v = vsugs_fit(univariate(ys), prior, opts(0.8, T, AllocationMode::Hard));
      const auto s = sugs_fit(univariate(ys), prior, {0.8, T});
      REQUIRE(v.state.num_clusters() == s.state.num_clusters());
      for (std::size_t i = 0; i < ys.size(); ++i) {
        CHECK(v.allocations[i].argmax() == s.allocations[i]);
        CHECK(v.allocations[i][s.allocations[i]] == 1.0);
      }
      for (std::size_t j = 0; j < s.state.num_clusters(); ++j) {
        CHECK(v.state.clusters[j].rho == s.state.clusters[j].rho);
        CHECK(v.state.clusters[j].nu == s.state.clusters[j].nu);
        CHECK(v.state.clusters[j].a == s.state.clusters[j].a);
        CHECK(v.state.clusters[j].b == s.state.clusters[j].b);
      }
    }
  }

  TEST_CASE("empty fit predicts with the prior") {
    VsugsFit<NigParams> fit(NigParams{0.5, 2.0, 1.0, 3.0}, opts(1.0, 4));
    const double y = 1.2;
    CHECK(predictive_density(fit, Observation(&y, 1)) ==
          doctest::Approx(oracle::nig_predictive({0.5, 2.0, 1.0, 3.0}, y)).epsilon(1e-13));
  }

  TEST_CASE("predictive density integrates to one") {
    for (std::size_t T : {3u, 10u, 60u}) {
      const auto fit = vsugs_fit(univariate(mixture_sample(120, T)), NigParams{},
                                 opts(1.0, T));
      const double mass = oracle::integrate_line(
          [&](double y) { return predictive_density(fit, Observation(&y, 1)); });
      CHECK(mass == doctest::Approx(1.0).epsilon(1e-8));
    }
  }

  TEST_CASE("fractional observation weight") {
    VsugsFit<NigParams> fit(NigParams{}, opts(1.0, 3));
    const double y = 1.0;
    vsugs_step(fit, Observation(&y, 1), 0.25);
    CHECK(fit.mass() == 0.25);
    CHECK(fit.state.soft_counts[0] == 0.25);
    CHECK(fit.state.clusters[0] == nig_weighted_update(NigParams{}, y, 0.25));
    CHECK_THROWS_AS(vsugs_step(fit, Observation(&y, 1), 0.0), std::invalid_argument);
  }

  TEST_CASE("multivariate fit with T = 1 is the pooled posterior") {
    std::mt19937_64 rng(51);
    std::normal_distribution<> z(0.0, 1.0);
    RowMatrix v(30, 2);
    for (int i = 0; i < 30; ++i) v(i, 0) = z(rng), v(i, 1) = z(rng) + 1;
    const auto prior = NiwParams::from_nig(0, 1, 2, 1, 2);
    const auto fit = vsugs_fit(Dataset(v), prior, opts(1.0, 1));
    std::vector<Eigen::VectorXd> ys;
    for (int i = 0; i < 30; ++i) ys.push_back(v.row(i).transpose());
    const auto want = oracle::batch_niw({prior.mean(), prior.kappa(), prior.psi(),
                                         prior.df()}, ys);
    CHECK((fit.state.clusters[0].psi() - want.psi).norm() < 1e-10 * want.psi.norm());
    CHECK(fit.state.lower_bound ==
          doctest::Approx(oracle::niw_log_marginal(
                              {prior.mean(), prior.kappa(), prior.psi(), prior.df()}, ys))
              .epsilon(1e-9));
  }

  TEST_CASE("printed forms are NIG-only and options are validated") {
    VsugsOptions o = opts(1.0, 2);
    o.bound = BoundForm::Printed;
    CHECK_THROWS_AS(VsugsFit<NiwParams>(NiwParams::from_nig(0, 1, 1, 1, 2), o),
                    std::invalid_argument);
    CHECK_NOTHROW(VsugsFit<NigParams>(NigParams{}, o));
    CHECK_THROWS_AS(VsugsFit<NigParams>(NigParams{}, opts(1.0, 0)),
                    std::invalid_argument);
    CHECK_THROWS_AS(VsugsFit<NigParams>(NigParams{}, opts(-1.0, 2)),
                    std::invalid_argument);
  }
}
