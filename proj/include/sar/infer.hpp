/* Confidence intervals for lambda.
 *
 * The adjusted estimate satisfies Pr(lambda_hat <= z) = Pr(V <= 0) under
 * single-peakedness, where V = y'S'(z)R(z)S(z)y is an indefinite quadratic
 * form in the normal vector ytilde = S(lambda)y/sigma. Writing
 *   B(z,lambda) = 1/2 [S(z)S^-1(lambda)]'[R(z)+R'(z)][S(z)S^-1(lambda)],
 * V = ytilde'B ytilde has cgf
 *   K(s) = -1/2 sum log(1-2 s b_i) + sum c_i^2 s b_i/(1-2 s b_i)
 * on s in (1/(2 b_min), 1/(2 b_max)), with b the eigenvalues of B and c the
 * rotated mean coordinates. The Lugannani-Rice formula evaluates
 * Pr(V <= 0) from the saddlepoint K'(s_hat) = 0, with the usual special
 * branch when s_hat sits at the mean.
 *
 * Test inversion of that cdf (with beta, sigma^2 replaced by their
 * estimates given lambda) yields the saddlepoint confidence interval; Wald
 * intervals use expected-information variances of the operative objective.
 */
#pragma once

#include <optional>

#include "sar/estimate.hpp"
#include "sar/model.hpp"

namespace sar {

struct QformSpec {
  Eigen::MatrixXd B;  // symmetric
  Eigen::VectorXd b;  // eigenvalues, ascending
  Eigen::VectorXd c;  // mean in the eigenbasis
};

enum class CdfBranch { general, mean_point };

struct CdfApprox {
  double z = 0.0;
  double prob = 0.0;
  double s_hat = 0.0;
  double w_hat = 0.0, u_hat = 0.0;
  CdfBranch branch = CdfBranch::general;
  bool clamped = false;  // prob fell outside [0,1] before clamping
};

struct Interval {
  double lo = 0.0, hi = 0.0;
  bool lo_unbounded = false, hi_unbounded = false;
  bool lo_at_edge = false, hi_at_edge = false;  // target level never attained
};

// Normal cdf / pdf helpers.
double norm_cdf(double x);
double norm_pdf(double x);

QformSpec build_qform(const SarData& data, double z, double lambda,
                      const Eigen::VectorXd& beta, double sigma2);

// K and derivatives; orders 0..3.
double cgf(const QformSpec& spec, double s, int order = 0);

CdfApprox lr_cdf_at_zero(const QformSpec& spec);

// Pr(lambda_hat <= z | lambda), plugging in beta_hat(lambda) and
// sigma2_aml(lambda).
double cdf_hat(const SarData& data, double z, double lambda);

// Two-sided (alpha1, alpha2) interval by monotone inversion of cdf_hat over
// the enlarged space; alpha1 = 0 gives the right-sided interval (lower end
// pinned to the space's lower endpoint).
Interval saddlepoint_ci(const SarData& data, double lambda_obs, double alpha1,
                        double alpha2,
                        const std::optional<EstimateContext>& ctx = {});

// Expected-information variance of lambda_hat for the two objectives.
double wald_variance_ml(const SarData& data, double lambda,
                        const Eigen::VectorXd& beta, double sigma2);
double wald_variance_aml(const SarData& data, double lambda,
                         const Eigen::VectorXd& beta, double sigma2);

Interval wald_ci(const SarData& data, const EstimateResult& r, double level,
                 bool right_sided = false);

}  // namespace sar
