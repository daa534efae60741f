#include "dpmseq/niw.hpp"
#include "dpmseq/nig.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <random>

using namespace dpmseq;

namespace {

Observation obs(const Eigen::VectorXd& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

NiwParams random_niw(std::mt19937_64& rng, int d) {
  std::normal_distribution<> z(0.0, 1.0);
  Eigen::MatrixXd a(d, d);
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c) a(r, c) = z(rng);
  Eigen::VectorXd m(d);
  for (int k = 0; k < d; ++k) m(k) = z(rng);
  const Eigen::MatrixXd psi = a * a.transpose() + Eigen::MatrixXd::Identity(d, d);
  return NiwParams(m, 0.5 + std::abs(z(rng)), psi, d + 1.0 + std::abs(z(rng)));
}

oracle::Niw as_oracle(const NiwParams& p) {
  return {p.mean(), p.kappa(), p.psi(), p.df()};
}

} // namespace

TEST_SUITE("niw") {
  TEST_CASE("construction validates its inputs") {
    const Eigen::Vector2d m(0, 0);
    CHECK_NOTHROW(NiwParams(m, 1.0, Eigen::Matrix2d::Identity(), 2.0));
    CHECK_THROWS_AS(NiwParams(m, 0.0, Eigen::Matrix2d::Identity(), 2.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(NiwParams(m, 1.0, Eigen::Matrix2d::Identity(), 1.0),
                    std::invalid_argument);
    Eigen::Matrix2d bad;
    bad << 1, 2, 2, 1;
    CHECK_THROWS_AS(NiwParams(m, 1.0, bad, 3.0), std::invalid_argument);
    Eigen::Matrix2d asym;
    asym << 2, 0.5, 0.1, 2;
    CHECK_THROWS_AS(NiwParams(m, 1.0, asym, 3.0), std::invalid_argument);
  }

  TEST_CASE("zero weight leaves parameters unchanged") {
    std::mt19937_64 rng(31);
    const auto p = random_niw(rng, 3);
    const Eigen::Vector3d y(1, 2, 3);
    CHECK(niw_weighted_update(p, obs(y), 0.0) == p);
  }

  TEST_CASE("one dimension reduces to the NIG update and predictive") {
    std::mt19937_64 rng(32);
    std::uniform_real_distribution<> u(0.1, 3.0);
    for (int rep = 0; rep < 100; ++rep) {
      const NigParams g{u(rng) - 1.5, u(rng), u(rng), u(rng)};
      const NiwParams w = NiwParams::from_nig(g.rho, g.nu, g.a, g.b, 1);
      CHECK(w.kappa() == doctest::Approx(1.0 / g.nu));
      CHECK(w.df() == doctest::Approx(2.0 * g.a));
      CHECK(w.psi()(0, 0) == doctest::Approx(2.0 * g.b));
      const double y = 4.0 * u(rng) - 6.0, wt = u(rng) / 3.0;
      const auto g2 = nig_weighted_update(g, y, wt);
      const auto w2 = niw_weighted_update(w, Observation(&y, 1), wt);
      CHECK(w2.kappa() == doctest::Approx(1.0 / g2.nu).epsilon(1e-13));
      CHECK(w2.mean()(0) == doctest::Approx(g2.rho).epsilon(1e-13));
      CHECK(w2.df() == doctest::Approx(2.0 * g2.a).epsilon(1e-13));
      CHECK(w2.psi()(0, 0) == doctest::Approx(2.0 * g2.b).epsilon(1e-12));
      const double z = 3.0 * u(rng) - 4.0;
      CHECK(niw_predictive(w2, Observation(&z, 1)) ==
            doctest::Approx(nig_predictive(g2, z)).epsilon(1e-12));
      CHECK(niw_expected_loglik(w2, Observation(&z, 1)) ==
            doctest::Approx(nig_expected_loglik(g2, z)).epsilon(1e-11));
      CHECK(niw_kl(w2, w) == doctest::Approx(nig_kl(g2, g)).epsilon(1e-9));
    }
  }

  TEST_CASE("unit updates equal the batch posterior") {
    std::mt19937_64 rng(33);
    std::normal_distribution<> z(0.0, 2.0);
    for (int rep = 0; rep < 100; ++rep) {
      const int d = 1 + static_cast<int>(rng() % 4);
      const auto prior = random_niw(rng, d);
      std::vector<Eigen::VectorXd> ys(1 + rng() % 15, Eigen::VectorXd(d));
      NiwParams p = prior;
      for (auto& y : ys) {
        for (int k = 0; k < d; ++k) y(k) = z(rng);
        p = niw_weighted_update(p, obs(y), 1.0);
      }
      const auto q = oracle::batch_niw(as_oracle(prior), ys);
      CHECK(p.kappa() == doctest::Approx(q.kappa).epsilon(1e-12));
      CHECK(p.df() == doctest::Approx(q.df).epsilon(1e-12));
      CHECK((p.mean() - q.mean).norm() < 1e-10 * (1 + q.mean.norm()));
      CHECK((p.psi() - q.psi).norm() < 1e-10 * q.psi.norm());
      const Eigen::MatrixXd l = p.psi_chol();
      CHECK((l * l.transpose() - p.psi()).norm() < 1e-10 * p.psi().norm());
    }
  }

  TEST_CASE("single 2-d observation matches the textbook posterior") {
    Eigen::Matrix2d psi;
    psi << 2.0, 0.3, 0.3, 1.0;
    const NiwParams prior(Eigen::Vector2d(0.5, -1.0), 0.8, psi, 4.0);
    const Eigen::Vector2d y(1.5, 2.0);
    const auto p = niw_weighted_update(prior, obs(y), 1.0);
    // kappa' = 1.8, mean' = (0.8 mean + y) / 1.8,
    // psi' = psi + (0.8 / 1.8) (y - mean)(y - mean)^T
    const Eigen::Vector2d dm = y - Eigen::Vector2d(0.5, -1.0);
    CHECK(p.kappa() == doctest::Approx(1.8));
    CHECK(p.df() == doctest::Approx(5.0));
    CHECK((p.mean() - (0.8 * Eigen::Vector2d(0.5, -1.0) + y) / 1.8).norm() < 1e-14);
    CHECK((p.psi() - (psi + (0.8 / 1.8) * dm * dm.transpose())).norm() < 1e-13);
  }

  TEST_CASE("predictive matches the multivariate t oracle") {
    std::mt19937_64 rng(34);
    std::normal_distribution<> z(0.0, 1.5);
    for (int rep = 0; rep < 100; ++rep) {
      const int d = 1 + static_cast<int>(rng() % 4);
      const auto p = random_niw(rng, d);
      Eigen::VectorXd y(d);
      for (int k = 0; k < d; ++k) y(k) = z(rng);
      CHECK(niw_predictive(p, obs(y)) ==
            doctest::Approx(oracle::niw_predictive(as_oracle(p), y)).epsilon(1e-11));
      const NiwPredictiveKernel k(p);
      CHECK(k.log_density(obs(y)) ==
            doctest::Approx(niw_log_predictive(p, obs(y))).epsilon(1e-12));
    }
  }

  TEST_CASE("predictive is invariant under joint rotation") {
    std::mt19937_64 rng(35);
    const auto p = random_niw(rng, 2);
    const double th = 0.7;
    Eigen::Matrix2d r;
    r << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
    const NiwParams q(r * p.mean(), p.kappa(), r * p.psi() * r.transpose(), p.df());
    const Eigen::Vector2d y(0.4, -1.1);
    const Eigen::Vector2d ry = r * y;
    CHECK(niw_predictive(p, obs(y)) ==
          doctest::Approx(niw_predictive(q, obs(ry))).epsilon(1e-12));
  }

  TEST_CASE("2-d predictive integrates to one over a wide box") {
    Eigen::Matrix2d psi;
    psi << 1.0, 0.2, 0.2, 0.5;
    const NiwParams p(Eigen::Vector2d(0.3, -0.2), 1.0, psi, 7.0);
    const double mass = oracle::integrate(
        [&](double x) {
          return oracle::integrate(
              [&](double y) {
                const double v[2] = {x, y};
                return niw_predictive(p, Observation(v, 2));
              },
              -80.0, 80.0);
        },
        -80.0, 80.0);
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-3));
  }

  TEST_CASE("log marginal matches the oracle and the chain rule") {
    std::mt19937_64 rng(36);
    std::normal_distribution<> z(0.0, 1.0);
    for (int rep = 0; rep < 40; ++rep) {
      const int d = 1 + static_cast<int>(rng() % 3);
      const auto prior = random_niw(rng, d);
      std::vector<Eigen::VectorXd> ys(1 + rng() % 8, Eigen::VectorXd(d));
      NiwStats st(static_cast<std::size_t>(d));
      NiwParams p = prior;
      double chain = 0.0;
      for (auto& y : ys) {
        for (int k = 0; k < d; ++k) y(k) = z(rng);
        st.add(obs(y));
        chain += niw_log_predictive(p, obs(y));
        p = niw_weighted_update(p, obs(y), 1.0);
      }
      const double lm = niw_log_marginal(prior, st);
      CHECK(lm == doctest::Approx(oracle::niw_log_marginal(as_oracle(prior), ys))
                      .epsilon(1e-10));
      CHECK(lm == doctest::Approx(chain).epsilon(1e-10));
      const auto post = niw_posterior(prior, st);
      CHECK((post.psi() - p.psi()).norm() < 1e-9 * p.psi().norm());
    }
  }

  TEST_CASE("long sequences of fractional updates stay positive-definite") {
    std::mt19937_64 rng(37);
    std::normal_distribution<> z(0.0, 1.0);
    std::uniform_real_distribution<> u(0.0, 1.0);
    NiwParams p = NiwParams::from_nig(0, 1, 1, 1, 3);
    for (int i = 0; i < 20000; ++i) {
      const Eigen::Vector3d y(z(rng) * 1e3, z(rng) * 1e-3, z(rng));
      p = niw_weighted_update(p, obs(y), u(rng));
    }
    CHECK(p.psi_llt().info() == Eigen::Success);
    const Eigen::MatrixXd l = p.psi_chol();
    CHECK((l * l.transpose() - p.psi()).norm() < 1e-8 * p.psi().norm());
  }

  TEST_CASE("KL divergence is zero at equality and positive otherwise") {
    std::mt19937_64 rng(38);
    const auto p = random_niw(rng, 3);
    CHECK(niw_kl(p, p) == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
    const Eigen::Vector3d y(1, 0, -1);
    CHECK(niw_kl(niw_weighted_update(p, obs(y), 0.4), p) > 0.0);
  }

  TEST_CASE("dimension mismatch is rejected") {
    const auto p = NiwParams::from_nig(0, 1, 1, 1, 2);
    const Eigen::Vector3d y(1, 2, 3);
    CHECK_THROWS_AS(niw_weighted_update(p, obs(y), 1.0), std::invalid_argument);
    CHECK_THROWS_AS((void)niw_predictive(p, obs(y)), std::invalid_argument);
  }
}
