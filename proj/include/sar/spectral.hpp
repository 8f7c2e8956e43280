/* Eigen-structure of W and the parameter spaces for lambda.
 *
 * S(lambda) = I - lambda*W is singular exactly at the reciprocals of the
 * nonzero real eigenvalues of W. The baseline space is
 *   Lambda = (1/omega_min, 1/omega_maxreal),
 * the interval of lambda around 0 on which det S(lambda) > 0. The adjusted
 * objective can stay bounded across some of these singularities; whether it
 * does is decided by the sign of tr(M_X Q_omega), where Q_omega is the
 * spectral projector onto the eigenspace of omega:
 *   positive -> the objective diverges to -inf (hard endpoint),
 *   zero     -> the singularity is removable (the space extends past it),
 *   negative -> the objective is unbounded above (estimation must stop).
 * adjusted_space() walks outward from Lambda applying that classification.
 *
 * EigenCache holds the complex eigendecomposition W = H diag(omega) H^-1 so
 * that log|det S(lambda)|, tr(M_X G(lambda)) and tr(M_X G^2(lambda)) become
 * O(n) sums per lambda, which is what makes dense grid sweeps and Monte
 * Carlo replications affordable.
 */
#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "sar/weights.hpp"

namespace sar {

struct RealEigenvalue {
  double value = 0.0;
  int algebraic_mult = 0;
  int geometric_mult = 0;
  bool semisimple = false;
};

struct SpectralProjector {
  double eigenvalue = 0.0;
  Eigen::MatrixXd Q;  // oblique projector onto null(W - omega I)
};

enum class EndpointClass { divergent, removable, unbounded_above };

struct ParamSpace {
  double lo = 0.0, hi = 0.0;
  EndpointClass lo_class = EndpointClass::divergent;
  EndpointClass hi_class = EndpointClass::divergent;
  std::vector<double> interior_singularities;  // removable points inside
  bool contains(double lambda) const { return lo < lambda && lambda < hi; }
};

enum class TraceSign { negative, zero, positive };

struct TraceMQ {
  TraceSign sign = TraceSign::zero;
  double value = 0.0;
};

struct SpectralTols {
  double imag = 1e-8;      // relative realness threshold (scaled by ||W||)
  double cluster = 1e-7;   // relative clustering threshold (scaled by ||W||)
  double rank = 1e-8;      // numeric-rank threshold (relative to sigma_max)
  double trace_zero = 1e-6;  // |tr(M_X Q)| < trace_zero * n counts as zero
};

// Real eigenvalues of W with multiplicities, sorted ascending.
std::vector<RealEigenvalue> real_eigen_structure(
    const Eigen::MatrixXd& W, const SpectralTols& tols = {});

// Projector onto null(W - omega I) along col(W - omega I); requires omega
// semisimple. For a simple omega this equals h l' / (l'h) with right/left
// eigenvectors h and l.
SpectralProjector spectral_projector(const Eigen::MatrixXd& W,
                                     const RealEigenvalue& omega,
                                     const SpectralTols& tols = {});

// tr(M_X Q) with sign classified at tolerance tols.trace_zero * n.
TraceMQ trace_MQ(const Eigen::MatrixXd& X, const SpectralProjector& proj,
                 const SpectralTols& tols = {});

// Scans real eigenvalues omega for ||M_X (omega I - W)|| ~ 0, i.e. for
// col(omega I - W) contained in col(X), which makes the profile likelihood
// unbounded. Returns the offending eigenvalue if any.
std::optional<double> check_assumption1(const Eigen::MatrixXd& W,
                                        const Eigen::MatrixXd& X,
                                        double rel_tol = 1e-10);
std::optional<double> check_assumption1(
    const Eigen::MatrixXd& W, const Eigen::MatrixXd& X,
    const std::vector<RealEigenvalue>& evs, double rel_tol = 1e-10);

// Lambda = (1/omega_min, 1/omega_maxreal); requires at least one negative
// and one positive real eigenvalue.
ParamSpace lambda_space(const Eigen::MatrixXd& W,
                        const SpectralTols& tols = {});
ParamSpace lambda_space(const std::vector<RealEigenvalue>& evs);

// The enlarged space for the adjusted objective (see file comment).
// Throws if a side runs out of real eigenvalues before hitting a divergent
// endpoint; an unbounded_above classification is reported via the endpoint
// class, not an exception.
ParamSpace adjusted_space(const Eigen::MatrixXd& W, const Eigen::MatrixXd& X,
                          const SpectralTols& tols = {});
// Overload reusing a precomputed real-eigenvalue structure; avoids repeating
// the O(n^3) spectral analysis when several space computations share one W.
ParamSpace adjusted_space(const Eigen::MatrixXd& W, const Eigen::MatrixXd& X,
                          const std::vector<RealEigenvalue>& evs,
                          const SpectralTols& tols = {});

// ---------------------------------------------------------------------------
// Cached complex eigendecomposition of W.

class EigenCache {
public:
  explicit EigenCache(const Eigen::MatrixXd& W);

  const Eigen::VectorXcd& omega() const { return omega_; }
  bool diagonalizable() const { return diagonalizable_; }
  int n() const { return static_cast<int>(omega_.size()); }

  // log|det S(lambda)| = sum_i log|1 - lambda omega_i|.
  double log_abs_det_S(double lambda) const;

  // Eigenweights of a projector-like matrix M: w = diag(H^-1 M H), so that
  // tr(M f(W)) = sum_i w_i f(omega_i). For M = M_X = I - Qx Qx' pass the
  // thin orthonormal factor Qx of X; w = 1 - diag((H^-1 Qx)(Qx' H)).
  Eigen::VectorXcd eigenweights_MX(const Eigen::MatrixXd& Qx) const;

  // tr(M_X G(lambda)) and tr(M_X G(lambda)^2) from cached eigenweights.
  static double trace_MG(const Eigen::VectorXcd& w,
                         const Eigen::VectorXcd& omega, double lambda);
  static double trace_MG2(const Eigen::VectorXcd& w,
                          const Eigen::VectorXcd& omega, double lambda);

  // Re tr(M_X log S(lambda)) = sum_i [Re(w_i) log|1 - lambda omega_i| -
  // Im(w_i) arg(1 - lambda omega_i)] on the principal branch (the
  // determinant-like term of the adjusted objective).
  static double log_det_term(const Eigen::VectorXcd& w,
                             const Eigen::VectorXcd& omega, double lambda);

private:
  Eigen::VectorXcd omega_;
  Eigen::MatrixXcd H_, Hinv_;
  bool diagonalizable_ = false;
};

// Reference implementation of tr(M_X G(lambda)) by dense LU solve; used to
// cross-check the cached spectral evaluation.
double trace_MG_direct(const Eigen::MatrixXd& W, const Eigen::MatrixXd& Mx,
                       double lambda);

// Orthonormal annihilator pieces for a design matrix: thin Q factor of X
// (n x k) and the projector M_X = I - Qx Qx'.
Eigen::MatrixXd thin_q(const Eigen::MatrixXd& X);
Eigen::MatrixXd annihilator(const Eigen::MatrixXd& X);

// Condition (C1): (n-k) tr(M_X G^2) > [tr(M_X G)]^2 on the whole space
// (grid check excluding small neighborhoods of singularities). Guarantees
// the adjusted objective is a.s. single-peaked.
struct C1Result {
  bool holds = true;
  double fail_at = 0.0;  // first grid point where the inequality fails
};
C1Result check_C1(const Eigen::MatrixXd& W, const Eigen::MatrixXd& X,
                  const ParamSpace& space, int grid_size = 2048);

}  // namespace sar
