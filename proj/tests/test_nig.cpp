#include "dpmseq/nig.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <random>

using namespace dpmseq;

namespace {

oracle::Nig as_oracle(const NigParams& p) { return {p.rho, p.nu, p.a, p.b}; }

void check_close(const NigParams& p, const oracle::Nig& q, double tol) {
  CHECK(p.rho == doctest::Approx(q.rho).epsilon(tol));
  CHECK(p.nu == doctest::Approx(q.nu).epsilon(tol));
  CHECK(p.a == doctest::Approx(q.a).epsilon(tol));
  CHECK(p.b == doctest::Approx(q.b).epsilon(tol));
}

} // namespace

TEST_SUITE("nig") {
  TEST_CASE("parameter validation") {
    CHECK_NOTHROW(NigParams{}.validate());
    CHECK_THROWS_AS((NigParams{0, 0, 1, 1}.validate()), std::invalid_argument);
    CHECK_THROWS_AS((NigParams{0, 1, -1, 1}.validate()), std::invalid_argument);
    CHECK_THROWS_AS((NigParams{0, 1, 1, 0}.validate()), std::invalid_argument);
    CHECK_THROWS_AS((NigParams{NAN, 1, 1, 1}.validate()), std::invalid_argument);
  }

  TEST_CASE("zero weight leaves parameters unchanged") {
    const NigParams p{0.3, 2.0, 1.5, 0.7};
    CHECK(nig_weighted_update(p, 4.0, 0.0) == p);
    CHECK(nig_weighted_update(p, 4.0, 1e-13) == p);
  }

  TEST_CASE("single unit-weight observation") {
    const auto q = nig_weighted_update({0, 1, 1, 1}, 2.0, 1.0);
    CHECK(q.rho == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(q.nu == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(q.a == doctest::Approx(1.5).epsilon(1e-15));
    CHECK(q.b == doctest::Approx(2.0).epsilon(1e-15));
    check_close(q, oracle::batch_nig({0, 1, 1, 1}, {2.0}), 1e-14);
  }

  TEST_CASE("half-weight observation") {
    const auto q = nig_weighted_update({0, 1, 1, 1}, 2.0, 0.5);
    CHECK(q.rho == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(q.nu == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(q.a == doctest::Approx(1.25).epsilon(1e-15));
    CHECK(q.b == doctest::Approx(5.0 / 3.0).epsilon(1e-15));
  }

  TEST_CASE("printed rate update differs from the conjugate one") {
    const auto q = nig_weighted_update({0, 1, 1, 1}, 2.0, 1.0, RateUpdate::Printed);
    CHECK(q.b == doctest::Approx(4.0).epsilon(1e-15));
  }

  TEST_CASE("invalid weight or observation") {
    CHECK_THROWS_AS((void)nig_weighted_update({}, 1.0, -0.1), std::invalid_argument);
    CHECK_THROWS_AS((void)nig_weighted_update({}, 1.0, 1.1), std::invalid_argument);
    CHECK_THROWS_AS((void)nig_weighted_update({}, INFINITY, 0.5), std::invalid_argument);
    CHECK_THROWS_AS((void)nig_weighted_update({}, NAN, 0.5), std::invalid_argument);
  }

  TEST_CASE("sequential unit updates equal the batch posterior in any order") {
    std::mt19937_64 rng(21);
    std::normal_distribution<> z(0.0, 3.0);
    std::uniform_real_distribution<> u(0.1, 3.0);
    for (int rep = 0; rep < 200; ++rep) {
      const NigParams prior{z(rng), u(rng), u(rng), u(rng)};
      std::vector<double> ys(1 + rng() % 40);
      for (auto& y : ys) y = z(rng);
      std::shuffle(ys.begin(), ys.end(), rng);
      NigParams p = prior;
      for (double y : ys) p = nig_weighted_update(p, y, 1.0);
      check_close(p, oracle::batch_nig(as_oracle(prior), ys), 1e-10);
    }
  }

  TEST_CASE("updates are continuous in the weight") {
    std::mt19937_64 rng(22);
    std::uniform_real_distribution<> u(0.0, 1.0 - 1e-8);
    for (int rep = 0; rep < 200; ++rep) {
      const NigParams p{u(rng) * 4 - 2, 0.2 + u(rng), 0.5 + u(rng), 0.5 + u(rng)};
      const double y = 10 * u(rng) - 5, w = u(rng);
      const auto a = nig_weighted_update(p, y, w);
      const auto b = nig_weighted_update(p, y, w + 1e-8);
      CHECK(std::abs(a.rho - b.rho) < 1e-6);
      CHECK(std::abs(a.nu - b.nu) < 1e-6);
      CHECK(std::abs(a.a - b.a) < 1e-6);
      CHECK(std::abs(a.b - b.b) < 1e-6);
    }
  }

  TEST_CASE("predictive density value at the location") {
    CHECK(nig_predictive({0, 1, 1, 1}, 0.0) == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(nig_predictive({0, 1, 1, 1}, 0.0) ==
          doctest::Approx(oracle::t_pdf(0.0, 2.0, 0.0, 2.0)).epsilon(1e-14));
  }

  TEST_CASE("predictive agrees with the t oracle and is symmetric") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<> u(0.1, 4.0);
    for (int rep = 0; rep < 200; ++rep) {
      const NigParams p{u(rng) - 2, u(rng), u(rng), u(rng)};
      const double c = 3 * u(rng);
      CHECK(nig_predictive(p, p.rho + c) ==
            doctest::Approx(nig_predictive(p, p.rho - c)).epsilon(1e-13));
      CHECK(nig_predictive(p, p.rho + c) ==
            doctest::Approx(oracle::nig_predictive(as_oracle(p), p.rho + c))
                .epsilon(1e-12));
      const NigPredictiveKernel k(p);
      CHECK(k.log_density(p.rho + c) ==
            doctest::Approx(nig_log_predictive(p, p.rho + c)).epsilon(1e-13));
    }
  }

  TEST_CASE("predictive integrates to one over the real line") {
    for (const NigParams p : {NigParams{0, 1, 1, 1}, NigParams{2, 0.3, 5, 2},
                              NigParams{-1, 4, 0.7, 0.2}}) {
      CHECK(oracle::integrate_line([&](double y) { return nig_predictive(p, y); }) ==
            doctest::Approx(1.0).epsilon(1e-9));
    }
  }

  TEST_CASE("predictive integrates to one on a wide finite window") {
    // a = 5 gives light enough tails for a +-50 sigma window
    const NigParams p{0.5, 1.0, 5.0, 3.0};
    const double sigma = std::sqrt(p.b * (p.nu + 1) / p.a);
    const double mass = oracle::integrate(
        [&](double y) { return nig_predictive(p, y); }, p.rho - 50 * sigma,
        p.rho + 50 * sigma);
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-6));
  }

  TEST_CASE("log marginal matches the closed-form oracle and the chain rule") {
    std::mt19937_64 rng(24);
    std::normal_distribution<> z(1.0, 2.0);
    const NigParams prior{0.2, 1.5, 1.2, 0.8};
    for (int rep = 0; rep < 50; ++rep) {
      std::vector<double> ys(1 + rng() % 12);
      NigStats st;
      double chain = 0.0;
      NigParams p = prior;
      for (auto& y : ys) {
        y = z(rng);
        st.add(y, 1.0);
        chain += nig_log_predictive(p, y);
        p = nig_weighted_update(p, y, 1.0);
      }
      const double lm = nig_log_marginal(prior, st);
      CHECK(lm == doctest::Approx(oracle::nig_log_marginal(as_oracle(prior), ys))
                      .epsilon(1e-11));
      CHECK(lm == doctest::Approx(chain).epsilon(1e-11));
      check_close(nig_posterior(prior, st), oracle::batch_nig(as_oracle(prior), ys),
                  1e-11);
    }
  }

  TEST_CASE("KL divergence is zero at equality and positive otherwise") {
    const NigParams p{0, 1, 2, 1};
    CHECK(nig_kl(p, p) == 0.0);
    CHECK(nig_kl(nig_weighted_update(p, 1.5, 0.7), p) > 0.0);
  }

  TEST_CASE("KL divergence matches numerical integration") {
    // KL(q||p) = E_q[log q(mu,zeta) - log p(mu,zeta)], integrated over zeta
    // with the inner normal KL in closed form.
    const NigParams p{0.3, 2.0, 1.5, 1.2};
    const NigParams q{1.0, 0.4, 3.0, 2.5};
    auto log_gamma_pdf = [](double z, double a, double b) {
      return a * std::log(b) - std::lgamma(a) + (a - 1) * std::log(z) - b * z;
    };
    const double kl = oracle::integrate(
        [&](double z) {
          const double gq = std::exp(log_gamma_pdf(z, q.a, q.b));
          const double vq = q.nu / z, vp = p.nu / z;
          const double normal_kl = 0.5 * (std::log(vp / vq) + vq / vp +
                                          (q.rho - p.rho) * (q.rho - p.rho) / vp - 1);
          return gq * (log_gamma_pdf(z, q.a, q.b) - log_gamma_pdf(z, p.a, p.b) +
                       normal_kl);
        },
        0.0, 60.0);
    CHECK(nig_kl(q, p) == doctest::Approx(kl).epsilon(1e-9));
  }

  TEST_CASE("expected log-likelihood matches numerical integration") {
    const NigParams q{0.7, 0.5, 2.5, 1.5};
    const double y = 1.9;
    auto log_gamma_pdf = [](double z, double a, double b) {
      return a * std::log(b) - std::lgamma(a) + (a - 1) * std::log(z) - b * z;
    };
    const double e = oracle::integrate(
        [&](double z) {
          const double d = y - q.rho;
          const double inner = 0.5 * std::log(z) - 0.5 * std::log(2 * std::numbers::pi) -
                               0.5 * z * (d * d + q.nu / z);
          return std::exp(log_gamma_pdf(z, q.a, q.b)) * inner;
        },
        0.0, 60.0);
    CHECK(nig_expected_loglik(q, y) == doctest::Approx(e).epsilon(1e-9));
  }
}
