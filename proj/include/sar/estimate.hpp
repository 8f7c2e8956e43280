/* The four lambda estimators.
 *
 *   qmle:                   argmax of l(lambda) over the baseline space.
 *   adjusted_qmle:          argmax of l_a(lambda) over the enlarged space,
 *                           found as the sign change of the adjusted score
 *                           when the single-peak condition holds.
 *   censored_adjusted_qmle: adjusted estimate clamped to the closure of the
 *                           baseline space (endpoints included where l_a is
 *                           bounded).
 *   unrestricted_qmle:      argmax of l(lambda) over all intervals between
 *                           reciprocal real eigenvalues inside a bounded
 *                           search window.
 *
 * Parameter-space construction and the single-peak check cost O(n^3); in
 * Monte Carlo loops they are computed once per graph and passed in through
 * EstimateContext (the classification does not depend on the y draw, and
 * generic regressor redraws do not move it either).
 */
#pragma once

#include <optional>

#include "sar/model.hpp"
#include "sar/spectral.hpp"

namespace sar {

enum class Method { qmle, aqmle, aqmle_censored, uqmle, lll };

struct EstimateResult {
  double lambda_hat = 0.0;
  Eigen::VectorXd beta;
  double sigma2_hat = 0.0;
  Method method = Method::qmle;
  ParamSpace space_used;
  bool outside_Lambda = false;     // adjusted estimate left the baseline space
  bool censored = false;           // clamping occurred
  bool multi_peak_detected = false;  // grid fallback engaged
  bool boundary = false;           // optimum stuck at a padded endpoint
};

// Precomputed per-graph quantities reusable across replications.
struct EstimateContext {
  ParamSpace lambda;    // baseline space
  ParamSpace adjusted;  // enlarged space
  bool c1_holds = true;
  std::vector<double> real_reciprocals;  // singularities for the
                                         // unrestricted search
};

EstimateContext make_context(const Eigen::MatrixXd& W,
                             const Eigen::MatrixXd& X);

EstimateResult qmle(const SarData& data,
                    const std::optional<EstimateContext>& ctx = {});
EstimateResult adjusted_qmle(const SarData& data,
                             const std::optional<EstimateContext>& ctx = {});
EstimateResult censored_adjusted_qmle(
    const SarData& data, const std::optional<EstimateContext>& ctx = {});
EstimateResult unrestricted_qmle(
    const SarData& data, const std::optional<EstimateContext>& ctx = {});

}  // namespace sar
