/* Network panels and the spatial error model.
 *
 * Panel of R networks, network r with m_r members:
 *   y_r = lambda*W_r*y_r + Xt_r*gamma + W_r*Xt_r*delta + alpha_r*iota + s*eps.
 * Stacked, this is a SAR model with W = diag(W_1..W_R) and design
 * X = (Xt, W*Xt, diag(iota_1..iota_R)); the network effects alpha_r are
 * incidental parameters.
 *
 * When every W_r has unit row sums, premultiplying network r by F_r'
 * (F_r an orthonormal basis of the centering projector M_r = I - iota iota'/m)
 * eliminates alpha_r and leaves a reduced-form SAR system of dimension n - R:
 *   y*_r = lambda*W*_r*y*_r + Xt*_r*gamma + W*_r*Xt*_r*delta + s*eps*_r,
 * with y* = F'y, W* = F'WF, Xt* = F'Xt. Gaussian estimation on that system is
 * the transformation estimator; the adjusted likelihood on the untransformed
 * panel needs no row-sum condition and coincides with it when there are no
 * regressors.
 *
 * Spatial error model y = X*beta + u, A(theta)u = s*eps with A = S(lambda):
 * profile likelihood, adjusted (REML-equivalent) likelihood, and its sigma^2
 * profile, all through U(theta) = A'M_{AX}A.
 */
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "sar/estimate.hpp"
#include "sar/model.hpp"
#include "sar/weights.hpp"

namespace sar {

struct NetworkPanel {
  int R = 0;
  std::vector<int> sizes;                // m_r
  std::vector<Eigen::MatrixXd> W_blocks;  // per-network weights
  std::vector<Eigen::MatrixXd> X_blocks;  // per-network regressors (k_tilde cols)
  Eigen::VectorXd y;                      // stacked outcomes
  WeightsMatrix W;                        // assembled block diagonal
  Eigen::MatrixXd X;                      // (Xt, W Xt, block intercepts)
  int k_tilde = 0;
  int n() const { return static_cast<int>(y.size()); }
};

// Assemble and validate (dimensions, full column rank of X).
NetworkPanel make_network_panel(std::vector<Eigen::MatrixXd> W_blocks,
                                std::vector<Eigen::MatrixXd> X_blocks,
                                Eigen::VectorXd y);

// Reduced-dimension system produced by the within-network transformation.
struct LllSystem {
  Eigen::VectorXd y;                   // F'y, length n - R
  WeightsMatrix W;                     // F'WF, block diagonal
  Eigen::MatrixXd X;                   // (F'Xt, W* F'Xt)
  std::vector<Eigen::MatrixXd> F;      // per-network m_r x (m_r - 1) bases
};

// Requires W_r iota = iota for every network (checked to 1e-10); otherwise
// throws ("transformation inapplicable"). basis_seed != 0 rotates each F_r by
// a random orthogonal matrix: any orthonormal completion gives the same
// likelihood.
LllSystem lll_transform(const NetworkPanel& panel, std::uint64_t basis_seed = 0);

// Gaussian log-likelihood of the transformed system at (sigma^2, lambda),
// regression coefficients profiled out. Additive constants dropped.
double lll_loglik(const LllSystem& sys, double sigma2, double lambda);
double lll_loglik(const NetworkPanel& panel, double sigma2, double lambda);

// Gaussian QMLE of lambda on the transformed system.
EstimateResult lll_estimator(const LllSystem& sys,
                             const std::optional<EstimateContext>& ctx = {});
EstimateResult lll_estimator(const NetworkPanel& panel);

struct SemModel {
  Eigen::VectorXd y;
  Eigen::MatrixXd X;
  WeightsMatrix W;
  int n() const { return static_cast<int>(y.size()); }
  int k() const { return static_cast<int>(X.cols()); }
};

// Profile (beta concentrated out) log-likelihood of the error model at
// (sigma^2, lambda); throws if S(lambda) is singular or S(lambda)X loses rank.
double sem_profile_loglik(const SemModel& m, double sigma2, double lambda);

// Adjusted likelihood: a genuine (REML-equivalent) likelihood for the
// invariance-reduced data.
double sem_adjusted_loglik(const SemModel& m, double sigma2, double lambda);

// Adjusted likelihood with sigma^2 profiled out at y'U y/(n-k).
double sem_adjusted_profile(const SemModel& m, double lambda);
double sem_sigma2_a(const SemModel& m, double lambda);

// Analytic gradient of sem_adjusted_loglik in (sigma^2, lambda); the lambda
// component is the recentered profile score. Dense O(n^3); for checks.
Eigen::Vector2d sem_adjusted_score(const SemModel& m, double sigma2,
                                   double lambda);

// True iff col(X) is (numerically) an invariant subspace of W:
// ||M_X W X|| < tol * ||W X||.
bool invariant_subspace_check(const Eigen::MatrixXd& W,
                              const Eigen::MatrixXd& X, double tol = 1e-10);

}  // namespace sar
