#include "dpmseq/sugs.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <map>
#include <random>

using namespace dpmseq;

namespace {

Dataset univariate(std::vector<double> ys) { return Dataset::from_values(ys); }

Dataset two_clumps(std::size_t n, double sd, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<> z(0.0, sd);
  std::vector<double> ys(n);
  for (std::size_t i = 0; i < n; ++i) ys[i] = (i % 2 ? 10.0 : -10.0) + z(rng);
  std::shuffle(ys.begin(), ys.end(), rng);
  return univariate(ys);
}

bool order_of_appearance(const std::vector<std::size_t>& labels) {
  std::size_t next = 0;
  for (auto l : labels) {
    if (l > next) return false;
    if (l == next) ++next;
  }
  return true;
}

} // namespace

TEST_SUITE("sugs") {
  TEST_CASE("first observation opens cluster 0 with the exact posterior") {
    const NigParams prior{0, 1, 1, 1};
    const auto fit = sugs_fit(univariate({2.0}), prior, {1.0, std::nullopt});
    REQUIRE(fit.allocations == std::vector<std::size_t>{0});
    REQUIRE(fit.state.num_clusters() == 1);
    const auto want = oracle::batch_nig({0, 1, 1, 1}, {2.0});
    CHECK(fit.state.clusters[0].rho == doctest::Approx(want.rho));
    CHECK(fit.state.clusters[0].nu == doctest::Approx(want.nu));
    CHECK(fit.state.clusters[0].a == doctest::Approx(want.a));
    CHECK(fit.state.clusters[0].b == doctest::Approx(want.b));
    CHECK(pseudo_marginal(fit) ==
          doctest::Approx(std::log(oracle::nig_predictive({0, 1, 1, 1}, 2.0))));
  }

  TEST_CASE("a distant second point opens a new cluster") {
    const auto fit = sugs_fit(univariate({0.0, 10.0}), NigParams{}, {1.0, std::nullopt});
    // oracle scores: existing (1/2) t(post(0)) vs new (1/2) t(prior)
    const auto post = oracle::batch_nig({0, 1, 1, 1}, {0.0});
    const double s_old = 0.5 * oracle::nig_predictive(post, 10.0);
    const double s_new = 0.5 * oracle::nig_predictive({0, 1, 1, 1}, 10.0);
    REQUIRE(s_new > s_old);
    CHECK(fit.allocations == std::vector<std::size_t>{0, 1});
  }

  TEST_CASE("a near-duplicate point joins the existing cluster") {
    const auto fit =
        sugs_fit(univariate({0.0, 0.01}), NigParams{}, {0.01, std::nullopt});
    CHECK(fit.allocations == std::vector<std::size_t>{0, 0});
  }

  TEST_CASE("identical points with small alpha form one cluster") {
    const auto fit = sugs_fit(univariate(std::vector<double>(50, 1.3)), NigParams{},
                              {0.01, std::nullopt});
    CHECK(fit.state.num_clusters() == 1);
    CHECK(fit.state.soft_counts == std::vector<double>{50.0});
  }

  TEST_CASE("two tight separated clumps give exactly two clusters") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const auto fit = sugs_fit(two_clumps(60, 0.1, seed), NigParams{0.0, 100.0, 1.0, 1.0},
                                {1.0, std::nullopt});
      CHECK(fit.state.num_clusters() == 2);
    }
  }

  TEST_CASE("only the chosen cluster changes at each step") {
    std::mt19937_64 rng(41);
    std::normal_distribution<> z(0.0, 3.0);
    SugsFit<NigParams> fit(NigParams{}, {2.0, std::nullopt});
    for (int i = 0; i < 200; ++i) {
      const auto before = fit.state.clusters;
      const double y = z(rng);
      sugs_step(fit, Observation(&y, 1));
      const std::size_t chosen = fit.allocations.back();
      for (std::size_t j = 0; j < before.size(); ++j)
        if (j != chosen) CHECK(fit.state.clusters[j] == before[j]);
      CHECK(order_of_appearance(fit.allocations));
    }
  }

  TEST_CASE("pseudo-marginal equals the batch value over the final partition") {
    std::mt19937_64 rng(42);
    std::normal_distribution<> z(0.0, 4.0);
    for (int rep = 0; rep < 30; ++rep) {
      std::vector<double> ys(5 + rng() % 100);
      for (auto& y : ys) y = z(rng);
      const NigParams prior{0.5, 2.0, 1.5, 2.0};
      const auto fit = sugs_fit(univariate(ys), prior, {0.7, std::nullopt});
      std::map<std::size_t, std::vector<double>> groups;
      for (std::size_t i = 0; i < ys.size(); ++i)
        groups[fit.allocations[i]].push_back(ys[i]);
      double batch = 0.0;
      for (const auto& [k, g] : groups)
        batch += oracle::nig_log_marginal({0.5, 2.0, 1.5, 2.0}, g);
      CHECK(pseudo_marginal(fit) == doctest::Approx(batch).epsilon(1e-9));
      // counts are consistent with the allocations
      for (const auto& [k, g] : groups)
        CHECK(fit.state.soft_counts[k] == static_cast<double>(g.size()));
    }
  }

  TEST_CASE("truncated variant never exceeds T clusters") {
    std::mt19937_64 rng(43);
    std::normal_distribution<> z(0.0, 10.0);
    std::vector<double> ys(300);
    for (auto& y : ys) y = z(rng);
    const auto fit = sugs_fit(univariate(ys), NigParams{}, {5.0, std::size_t{3}});
    CHECK(fit.state.num_clusters() <= 3);
    const auto loose = sugs_fit(univariate(ys), NigParams{}, {5.0, std::nullopt});
    CHECK(loose.state.num_clusters() > 3);
  }

  TEST_CASE("predictive density integrates to one") {
    std::mt19937_64 rng(44);
    std::normal_distribution<> z(0.0, 2.0);
    std::vector<double> ys(80);
    for (auto& y : ys) y = z(rng) + (rng() % 2 ? 3 : -3);
    for (auto trunc : {std::optional<std::size_t>{}, std::optional<std::size_t>{4}}) {
      const auto fit = sugs_fit(univariate(ys), NigParams{}, {1.0, trunc});
      const double mass = oracle::integrate_line(
          [&](double y) { return predictive_density(fit, Observation(&y, 1)); });
      CHECK(mass == doctest::Approx(1.0).epsilon(1e-8));
    }
  }

  TEST_CASE("multivariate clumps") {
    std::mt19937_64 rng(45);
    std::normal_distribution<> z(0.0, 0.2);
    RowMatrix v(100, 2);
    for (int i = 0; i < 100; ++i) {
      const double c = i % 2 ? 5.0 : -5.0;
      v(i, 0) = c + z(rng);
      v(i, 1) = -c + z(rng);
    }
    const auto fit = sugs_fit(Dataset(v), NiwParams::from_nig(0, 100, 1, 1, 2),
                              {1.0, std::nullopt});
    CHECK(fit.state.num_clusters() == 2);
  }

  TEST_CASE("invalid inputs") {
    CHECK_THROWS_AS(sugs_fit(univariate({}), NigParams{}, {1.0, std::nullopt}),
                    std::invalid_argument);
    CHECK_THROWS_AS(sugs_fit(univariate({1.0}), NigParams{}, {0.0, std::nullopt}),
                    std::invalid_argument);
    RowMatrix v(2, 2);
    v.setZero();
    CHECK_THROWS_AS(sugs_fit(Dataset(v), NigParams{}, {1.0, std::nullopt}),
                    std::invalid_argument);
  }
}
