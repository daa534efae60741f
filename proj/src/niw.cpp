#include "dpmseq/niw.hpp"

#include <boost/math/special_functions/digamma.hpp>

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace dpmseq {

namespace {

constexpr double kLogPi = 1.1447298858494001741434273513530587;
constexpr double kLog2 = std::numbers::ln2;

Eigen::Map<const Eigen::VectorXd> as_vector(Observation y) {
  return {y.data(), static_cast<Eigen::Index>(y.size())};
}

double log_mv_gamma(double x, std::size_t d) {
  double r = 0.25 * static_cast<double>(d * (d - 1)) * kLogPi;
  for (std::size_t k = 1; k <= d; ++k)
    r += std::lgamma(x + 0.5 * (1.0 - static_cast<double>(k)));
  return r;
}

double mv_digamma(double x, std::size_t d) {
  double r = 0.0;
  for (std::size_t k = 1; k <= d; ++k)
    r += boost::math::digamma(x + 0.5 * (1.0 - static_cast<double>(k)));
  return r;
}

void check_dim(const NiwParams& p, Observation y) {
  if (y.size() != p.dim())
    throw std::invalid_argument("NIW: observation dimension mismatch");
}

} // namespace

NiwParams::NiwParams(Eigen::VectorXd mean, double kappa, Eigen::MatrixXd psi,
                     double df)
    : mean_(std::move(mean)), kappa_(kappa), psi_(std::move(psi)), df_(df) {
  const auto d = mean_.size();
  if (d < 1) throw std::invalid_argument("NiwParams: empty mean");
  if (psi_.rows() != d || psi_.cols() != d)
    throw std::invalid_argument("NiwParams: psi must be d x d");
  if (!mean_.allFinite() || !psi_.allFinite() || !std::isfinite(kappa_) ||
      !std::isfinite(df_))
    throw std::invalid_argument("NiwParams: non-finite field");
  if (!(kappa_ > 0.0)) throw std::invalid_argument("NiwParams: kappa <= 0");
  if (!(df_ > static_cast<double>(d) - 1.0))
    throw std::invalid_argument("NiwParams: df must exceed d - 1");
  const double scale = std::max(1.0, psi_.cwiseAbs().maxCoeff());
  if ((psi_ - psi_.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw std::invalid_argument("NiwParams: psi not symmetric");
  chol_.compute(psi_);
  if (chol_.info() != Eigen::Success)
    throw std::invalid_argument("NiwParams: psi not positive-definite");
}

NiwParams::NiwParams(Unchecked, Eigen::VectorXd mean, double kappa,
                     Eigen::MatrixXd psi, double df,
                     Eigen::LLT<Eigen::MatrixXd> chol)
    : mean_(std::move(mean)), kappa_(kappa), psi_(std::move(psi)), df_(df),
      chol_(std::move(chol)) {}

double NiwParams::log_det_psi() const noexcept {
  return 2.0 * chol_.matrixLLT().diagonal().array().log().sum();
}

NiwParams NiwParams::from_nig(double rho, double nu, double a, double b,
                              std::size_t d) {
  const auto n = static_cast<Eigen::Index>(d);
  return NiwParams(Eigen::VectorXd::Constant(n, rho), 1.0 / nu,
                   2.0 * b * Eigen::MatrixXd::Identity(n, n),
                   2.0 * a + static_cast<double>(d) - 1.0);
}

NiwParams niw_weighted_update(const NiwParams& p, Observation y, double w) {
  check_dim(p, y);
  if (!(w >= 0.0 && w <= 1.0))
    throw std::invalid_argument("niw_weighted_update: weight outside [0, 1]");
  const auto yv = as_vector(y);
  if (!yv.allFinite())
    throw std::invalid_argument("niw_weighted_update: non-finite observation");
  if (w < 1e-12) return p;

  const double kappa = p.kappa_ + w;
  const Eigen::VectorXd diff = yv - p.mean_;
  Eigen::VectorXd mean = p.mean_ + (w / kappa) * diff;
  const double c = p.kappa_ * w / kappa;
  Eigen::MatrixXd psi = p.psi_;
  psi.noalias() += c * diff * diff.transpose();

  Eigen::LLT<Eigen::MatrixXd> chol = p.chol_;
  chol.rankUpdate(std::sqrt(c) * diff, 1.0);
  if (chol.info() != Eigen::Success) {
    chol.compute(psi);
    if (chol.info() != Eigen::Success)
      throw NumericError("niw_weighted_update: psi lost positive-definiteness");
  }
  return NiwParams(NiwParams::Unchecked{}, std::move(mean), kappa,
                   std::move(psi), p.df_ + w, std::move(chol));
}

NiwPredictiveKernel::NiwPredictiveKernel(const NiwParams& p)
    : loc_(p.mean()), chol_(p.psi_chol()) {
  const auto d = static_cast<double>(p.dim());
  const double dof = p.df() - d + 1.0;
  if (!(dof > 0.0))
    throw std::invalid_argument("niw predictive: df - d + 1 must be positive");
  const double k = p.kappa();
  const double log_det_scale = d * std::log((k + 1.0) / (k * dof)) +
                               p.log_det_psi();
  half_df_plus_dim_ = 0.5 * (dof + d);
  maha_scale_ = k / (k + 1.0);
  log_norm_ = std::lgamma(0.5 * (dof + d)) - std::lgamma(0.5 * dof) -
              0.5 * d * (std::log(dof) + kLogPi) - 0.5 * log_det_scale;
}

double NiwPredictiveKernel::log_density(Observation y) const {
  if (static_cast<Eigen::Index>(y.size()) != loc_.size())
    throw std::invalid_argument("niw predictive: dimension mismatch");
  Eigen::VectorXd z = as_vector(y) - loc_;
  chol_.triangularView<Eigen::Lower>().solveInPlace(z);
  return log_norm_ - half_df_plus_dim_ * std::log1p(maha_scale_ * z.squaredNorm());
}

double niw_log_predictive(const NiwParams& p, Observation y) {
  check_dim(p, y);
  return NiwPredictiveKernel(p).log_density(y);
}

double niw_predictive(const NiwParams& p, Observation y) {
  return std::exp(niw_log_predictive(p, y));
}

double niw_expected_loglik(const NiwParams& post, Observation y) {
  check_dim(post, y);
  const auto d = post.dim();
  const double dd = static_cast<double>(d);
  const double e_log_det =
      mv_digamma(0.5 * post.df(), d) + dd * kLog2 - post.log_det_psi();
  const Eigen::VectorXd z = post.psi_llt().matrixL().solve(as_vector(y) - post.mean());
  return 0.5 * e_log_det - 0.5 * dd * (kLog2 + kLogPi) -
         0.5 * (dd / post.kappa() + post.df() * z.squaredNorm());
}

double niw_kl(const NiwParams& post, const NiwParams& prior) {
  if (post == prior) return 0.0;
  const auto d = post.dim();
  const double dd = static_cast<double>(d);
  const double n1 = post.df();
  const double n0 = prior.df();
  const auto l1 = post.psi_llt().matrixL();
  const Eigen::MatrixXd m = l1.solve(prior.psi_chol());
  const double trace = m.squaredNorm();
  const double wishart =
      -0.5 * n0 * (prior.log_det_psi() - post.log_det_psi()) +
      0.5 * n1 * (trace - dd) + log_mv_gamma(0.5 * n0, d) -
      log_mv_gamma(0.5 * n1, d) + 0.5 * (n1 - n0) * mv_digamma(0.5 * n1, d);
  const Eigen::VectorXd z = l1.solve(post.mean() - prior.mean());
  const double ratio = prior.kappa() / post.kappa();
  const double normal = 0.5 * (dd * ratio - dd - dd * std::log(ratio) +
                               prior.kappa() * n1 * z.squaredNorm());
  return wishart + normal;
}

void NiwStats::add(Observation y, double w) {
  const auto yv = as_vector(y);
  n += w;
  sum += w * yv;
  outer.noalias() += w * yv * yv.transpose();
}

NiwParams niw_posterior(const NiwParams& prior, const NiwStats& s) {
  if (s.n <= 0.0) return prior;
  const Eigen::VectorXd ybar = s.sum / s.n;
  const double kappa = prior.kappa() + s.n;
  Eigen::VectorXd mean = (prior.kappa() * prior.mean() + s.sum) / kappa;
  const Eigen::VectorXd dm = ybar - prior.mean();
  Eigen::MatrixXd psi = prior.psi() + (s.outer - s.n * ybar * ybar.transpose()) +
                        (prior.kappa() * s.n / kappa) * dm * dm.transpose();
  psi = 0.5 * (psi + psi.transpose()).eval();
  return NiwParams(std::move(mean), kappa, std::move(psi), prior.df() + s.n);
}

double niw_log_marginal(const NiwParams& prior, const NiwStats& s) {
  if (s.n <= 0.0) return 0.0;
  const NiwParams q = niw_posterior(prior, s);
  const auto d = prior.dim();
  const double dd = static_cast<double>(d);
  return -0.5 * s.n * dd * kLogPi + log_mv_gamma(0.5 * q.df(), d) -
         log_mv_gamma(0.5 * prior.df(), d) +
         0.5 * prior.df() * prior.log_det_psi() - 0.5 * q.df() * q.log_det_psi() +
         0.5 * dd * (std::log(prior.kappa()) - std::log(q.kappa()));
}

} // namespace dpmseq
