/* Core SAR model objects and likelihood/score formulas.
 *
 * Model: y = lambda*W*y + X*beta + sigma*eps, S(lambda) = I - lambda*W,
 * G(lambda) = W S^-1(lambda), M_X = I - X(X'X)^-1 X'.
 *
 * Everything evaluated along a lambda grid reduces to three scalars,
 *   a = y'W'M_X W y,  b = y'W'M_X y,  c = y'M_X y,
 * because y'S'(lambda)M_X S(lambda)y = c - 2*lambda*b + lambda^2*a and
 * y'S'(lambda)M_X W y = b - lambda*a, plus eigenvalue sums for the
 * determinant-like terms. SarData precomputes the scalars, the thin QR
 * factor of X, and the eigenweights of M_X against the (shared) complex
 * eigendecomposition of W, so each objective/score evaluation is O(n).
 *
 * Profile quasi log-likelihood (constants dropped):
 *   l(lambda) = -(n/2) log(sigma2_ml(lambda)) + log|det S(lambda)|.
 * Adjusted objective:
 *   l_a(lambda) = -((n-k)/2) log(y'S'M_X S y) + Re tr(M_X log S(lambda)),
 * whose derivative is the adjusted profile score
 *   s_a2(lambda) = (n-k)(b - lambda*a)/(c - 2*lambda*b + lambda^2*a)
 *                  - tr(M_X G(lambda)),
 * and whose zeros coincide with those of the unbiased estimating function
 *   q(lambda) = y'S'(lambda) R(lambda) S(lambda) y,
 *   R(lambda) = M_X (G(lambda) - tr(M_X G(lambda))/(n-k) * I).
 */
#pragma once

#include <Eigen/Dense>
#include <memory>

#include "sar/rng.hpp"
#include "sar/spectral.hpp"
#include "sar/weights.hpp"

namespace sar {

struct SarParams {
  double lambda = 0.0;
  Eigen::VectorXd beta;
  double sigma2 = 1.0;
};

class SarData {
public:
  // Validates rank(X) = k <= n-2. A precomputed EigenCache for W may be
  // shared across many SarData instances (Monte Carlo replications on a
  // fixed graph); when absent one is built here.
  SarData(Eigen::VectorXd y, Eigen::MatrixXd X, WeightsMatrix W,
          std::shared_ptr<const EigenCache> cache = nullptr);

  int n() const { return n_; }
  int k() const { return k_; }
  const Eigen::VectorXd& y() const { return y_; }
  const Eigen::MatrixXd& X() const { return X_; }
  const WeightsMatrix& W() const { return W_; }
  const Eigen::MatrixXd& Qx() const { return Qx_; }
  const EigenCache& cache() const { return *cache_; }
  std::shared_ptr<const EigenCache> cache_ptr() const { return cache_; }
  const Eigen::VectorXcd& eigenweights() const { return mw_; }

  // y'S'(lambda) M_X S(lambda) y; errors on (near) perfect fit.
  double resid_qf(double lambda) const;
  double qf_a() const { return a_; }
  double qf_b() const { return b_; }
  double qf_c() const { return c_; }

  double trace_MG(double lambda) const;
  double trace_MG2(double lambda) const;
  double trace_G(double lambda) const;

private:
  Eigen::VectorXd y_;
  Eigen::MatrixXd X_;
  WeightsMatrix W_;
  Eigen::MatrixXd Qx_;
  std::shared_ptr<const EigenCache> cache_;
  Eigen::VectorXcd mw_;  // eigenweights of M_X
  double a_ = 0.0, b_ = 0.0, c_ = 0.0;
  int n_ = 0, k_ = 0;
};

// OLS of S(lambda)y on X.
Eigen::VectorXd beta_hat(const SarData& data, double lambda);

// Residual variance at lambda; the adjusted version divides by n-k instead
// of n (exactly sigma2_aml = n/(n-k) * sigma2_ml).
double sigma2_ml(const SarData& data, double lambda);
double sigma2_aml(const SarData& data, double lambda);

double profile_loglik(const SarData& data, double lambda);

// Score of the profile likelihood in (sigma^2, lambda), and its expectation
// at the true parameters under mean-zero unit-variance errors (independent
// of beta; the sigma^2 entry is -k/(2 sigma^2)).
Eigen::Vector2d profile_score_pair(const SarData& data, double sigma2,
                                   double lambda);
Eigen::Vector2d score_expectation(const SarData& data, double sigma2,
                                  double lambda);

double adjusted_score(const SarData& data, double lambda);
double estimating_fn(const SarData& data, double lambda);
double adjusted_loglik(const SarData& data, double lambda);

// Adjusted objective in (sigma^2, lambda) (not profiled over sigma^2):
//   -((n-k)/2) log sigma^2 - qf/(2 sigma^2) + Re tr(M_X log S(lambda)).
double adjusted_loglik_full(const SarData& data, double sigma2,
                            double lambda);

// Reduced form draw y = S^-1(lambda) (X beta + sigma eps).
Eigen::VectorXd simulate_y(const Eigen::MatrixXd& W, const Eigen::MatrixXd& X,
                           const SarParams& params, ErrorDist dist, Rng& rng);

}  // namespace sar
