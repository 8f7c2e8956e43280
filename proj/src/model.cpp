#include "sar/model.hpp"

#include <cmath>
#include <complex>
#include <functional>
#include <stdexcept>

namespace sar {

namespace {

// tr(M_X G(lambda)^2) by dense LU; reference path for non-diagonalizable W.
double trace_MG2_direct(const Eigen::MatrixXd& W, const Eigen::MatrixXd& Mx,
                        double lambda) {
  const Eigen::Index n = W.rows();
  Eigen::MatrixXd S = Eigen::MatrixXd::Identity(n, n) - lambda * W;
  Eigen::MatrixXd G = W * S.partialPivLu().inverse();
  return (Mx * G * G).trace();
}

// tr(G(lambda)) from the eigenvalues alone.
double trace_G_sum(const Eigen::VectorXcd& omega, double lambda) {
  std::complex<double> s(0.0, 0.0);
  for (Eigen::Index i = 0; i < omega.size(); ++i)
    s += omega(i) / (1.0 - lambda * omega(i));
  return s.real();
}

// Adaptive Gauss-Kronrod (7-15) quadrature on [a,b].
double gk15(const std::function<double(double)>& f, double a, double b,
            double tol, int depth) {
  // Kronrod-15 nodes/weights on [-1,1]; odd-indexed nodes are the Gauss-7
  // points.
  static const double xk[15] = {
      -0.991455371120813, -0.949107912342759, -0.864864423359769,
      -0.741531185599394, -0.586087235467691, -0.405845151377397,
      -0.207784955007898, 0.0,                0.207784955007898,
      0.405845151377397,  0.586087235467691,  0.741531185599394,
      0.864864423359769,  0.949107912342759,  0.991455371120813};
  static const double wk[15] = {
      0.022935322010529, 0.063092092629979, 0.104790010322250,
      0.140653259715525, 0.169004726639267, 0.190350578064785,
      0.204432940075298, 0.209482141084728, 0.204432940075298,
      0.190350578064785, 0.169004726639267, 0.140653259715525,
      0.104790010322250, 0.063092092629979, 0.022935322010529};
  static const double wg[7] = {0.129484966168870, 0.279705391489277,
                               0.381830050505119, 0.417959183673469,
                               0.381830050505119, 0.279705391489277,
                               0.129484966168870};
  const double h = 0.5 * (b - a), c = 0.5 * (a + b);
  double fk = 0.0, fg = 0.0;
  double fx[15];
  for (int i = 0; i < 15; ++i) {
    fx[i] = f(c + h * xk[i]);
    fk += wk[i] * fx[i];
  }
  for (int i = 0; i < 7; ++i) fg += wg[i] * fx[2 * i + 1];
  fk *= h;
  fg *= h;
  if (std::abs(fk - fg) < tol || depth >= 20) return fk;
  return gk15(f, a, c, tol * 0.5, depth + 1) +
         gk15(f, c, b, tol * 0.5, depth + 1);
}

}  // namespace

SarData::SarData(Eigen::VectorXd y, Eigen::MatrixXd X, WeightsMatrix W,
                 std::shared_ptr<const EigenCache> cache)
    : y_(std::move(y)), X_(std::move(X)), W_(std::move(W)) {
  n_ = static_cast<int>(y_.size());
  k_ = static_cast<int>(X_.cols());
  if (X_.rows() != n_ || W_.n() != n_)
    throw std::invalid_argument("SarData: dimension mismatch among y, X, W");
  if (k_ > n_ - 2)
    throw std::invalid_argument("SarData: need k <= n-2");
  if (k_ > 0) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X_);
    if (qr.rank() < k_)
      throw std::invalid_argument("SarData: X is rank deficient");
  }
  Qx_ = thin_q(X_);
  cache_ = cache ? std::move(cache)
                 : std::make_shared<const EigenCache>(W_.entries);
  if (cache_->n() != n_)
    throw std::invalid_argument("SarData: cache built for a different W");
  mw_ = cache_->eigenweights_MX(Qx_);

  // Scalars driving every quadratic form in lambda: project y and Wy off
  // col(X) once.
  Eigen::VectorXd Wy = W_.entries * y_;
  Eigen::VectorXd My = y_ - Qx_ * (Qx_.transpose() * y_);
  Eigen::VectorXd MWy = Wy - Qx_ * (Qx_.transpose() * Wy);
  a_ = MWy.squaredNorm();
  b_ = MWy.dot(y_);
  c_ = My.squaredNorm();
}

double SarData::resid_qf(double lambda) const {
  double qf = c_ - 2.0 * lambda * b_ + lambda * lambda * a_;
  if (qf < 1e-14 * y_.squaredNorm())
    throw std::runtime_error(
        "degenerate data: residual quadratic form vanishes (perfect fit)");
  return qf;
}

double SarData::trace_MG(double lambda) const {
  if (cache_->diagonalizable())
    return EigenCache::trace_MG(mw_, cache_->omega(), lambda);
  return trace_MG_direct(W_.entries, annihilator(X_), lambda);
}

double SarData::trace_MG2(double lambda) const {
  if (cache_->diagonalizable())
    return EigenCache::trace_MG2(mw_, cache_->omega(), lambda);
  return trace_MG2_direct(W_.entries, annihilator(X_), lambda);
}

double SarData::trace_G(double lambda) const {
  return trace_G_sum(cache_->omega(), lambda);
}

Eigen::VectorXd beta_hat(const SarData& data, double lambda) {
  Eigen::VectorXd Sy =
      data.y() - lambda * (data.W().entries * data.y());
  return data.X().householderQr().solve(Sy);
}

double sigma2_ml(const SarData& data, double lambda) {
  return data.resid_qf(lambda) / data.n();
}

double sigma2_aml(const SarData& data, double lambda) {
  return data.resid_qf(lambda) / (data.n() - data.k());
}

double profile_loglik(const SarData& data, double lambda) {
  return -0.5 * data.n() * std::log(sigma2_ml(data, lambda)) +
         data.cache().log_abs_det_S(lambda);
}

Eigen::Vector2d profile_score_pair(const SarData& data, double sigma2,
                                   double lambda) {
  if (sigma2 <= 0.0)
    throw std::invalid_argument("profile_score_pair: sigma2 must be > 0");
  double qf = data.resid_qf(lambda);
  Eigen::Vector2d s;
  s(0) = -0.5 * data.n() / sigma2 + 0.5 * qf / (sigma2 * sigma2);
  s(1) = (data.qf_b() - lambda * data.qf_a()) / sigma2 -
         data.trace_G(lambda);
  return s;
}

Eigen::Vector2d score_expectation(const SarData& data, double sigma2,
                                  double lambda) {
  if (sigma2 <= 0.0)
    throw std::invalid_argument("score_expectation: sigma2 must be > 0");
  Eigen::Vector2d e;
  e(0) = -0.5 * data.k() / sigma2;
  e(1) = data.trace_MG(lambda) - data.trace_G(lambda);
  return e;
}

double adjusted_score(const SarData& data, double lambda) {
  double qf = data.resid_qf(lambda);
  double num = data.qf_b() - lambda * data.qf_a();
  return (data.n() - data.k()) * num / qf - data.trace_MG(lambda);
}

double estimating_fn(const SarData& data, double lambda) {
  double qf = data.resid_qf(lambda);
  double num = data.qf_b() - lambda * data.qf_a();
  return num - data.trace_MG(lambda) / (data.n() - data.k()) * qf;
}

double adjusted_loglik(const SarData& data, double lambda) {
  double det_term;
  if (data.cache().diagonalizable()) {
    det_term = EigenCache::log_det_term(data.eigenweights(),
                                        data.cache().omega(), lambda);
  } else {
    // Re tr(M_X log S(lambda)) = -int_0^lambda tr(M_X G(t)) dt.
    Eigen::MatrixXd Mx = annihilator(data.X());
    const Eigen::MatrixXd& W = data.W().entries;
    det_term = -gk15([&](double t) { return trace_MG_direct(W, Mx, t); },
                     0.0, lambda, 1e-10, 0);
  }
  return -0.5 * (data.n() - data.k()) * std::log(data.resid_qf(lambda)) +
         det_term;
}

double adjusted_loglik_full(const SarData& data, double sigma2,
                            double lambda) {
  if (sigma2 <= 0.0)
    throw std::invalid_argument("adjusted_loglik_full: sigma2 must be > 0");
  double det_term =
      adjusted_loglik(data, lambda) +
      0.5 * (data.n() - data.k()) * std::log(data.resid_qf(lambda));
  return -0.5 * (data.n() - data.k()) * std::log(sigma2) -
         0.5 * data.resid_qf(lambda) / sigma2 + det_term;
}

Eigen::VectorXd simulate_y(const Eigen::MatrixXd& W, const Eigen::MatrixXd& X,
                           const SarParams& params, ErrorDist dist, Rng& rng) {
  const Eigen::Index n = W.rows();
  if (X.rows() != n || params.beta.size() != X.cols())
    throw std::invalid_argument("simulate_y: dimension mismatch");
  Eigen::VectorXd rhs = X * params.beta;
  double sigma = std::sqrt(params.sigma2);
  for (Eigen::Index i = 0; i < n; ++i)
    rhs(i) += sigma * draw_error(rng, dist);
  Eigen::MatrixXd S = Eigen::MatrixXd::Identity(n, n) - params.lambda * W;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(S);
  if (std::abs(lu.determinant()) < 1e-300)
    throw std::invalid_argument("simulate_y: S(lambda) is singular");
  return lu.solve(rhs);
}

}  // namespace sar
