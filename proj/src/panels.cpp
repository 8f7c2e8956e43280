#include "sar/panels.hpp"

#include <cmath>
#include <stdexcept>

#include "sar/rng.hpp"
#include "sar/spectral.hpp"

namespace sar {

namespace {

// log|det(A)| through the LU diagonal; throws on a numerically singular A.
double log_abs_det(const Eigen::MatrixXd& A) {
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
  double s = 0.0;
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    double d = std::abs(lu.matrixLU()(i, i));
    if (d < 1e-300) throw std::runtime_error("log_abs_det: singular matrix");
    s += std::log(d);
  }
  return s;
}

}  // namespace

NetworkPanel make_network_panel(std::vector<Eigen::MatrixXd> W_blocks,
                                std::vector<Eigen::MatrixXd> X_blocks,
                                Eigen::VectorXd y) {
  if (W_blocks.empty() || W_blocks.size() != X_blocks.size())
    throw std::invalid_argument("make_network_panel: block count mismatch");
  NetworkPanel p;
  p.R = static_cast<int>(W_blocks.size());
  p.k_tilde = static_cast<int>(X_blocks[0].cols());
  int n = 0;
  for (int r = 0; r < p.R; ++r) {
    int m = static_cast<int>(W_blocks[r].rows());
    if (m < 2 || W_blocks[r].cols() != m)
      throw std::invalid_argument("make_network_panel: bad weights block");
    if (X_blocks[r].rows() != m || X_blocks[r].cols() != p.k_tilde)
      throw std::invalid_argument("make_network_panel: bad regressor block");
    p.sizes.push_back(m);
    n += m;
  }
  if (y.size() != n)
    throw std::invalid_argument("make_network_panel: y length mismatch");

  std::vector<WeightsMatrix> wrapped;
  for (auto& b : W_blocks) wrapped.push_back({b, Normalization::none, {}});
  p.W = block_diag(wrapped);
  p.W_blocks = std::move(W_blocks);
  p.X_blocks = std::move(X_blocks);
  p.y = std::move(y);

  int kt = p.k_tilde;
  p.X.resize(n, 2 * kt + p.R);
  p.X.setZero();
  int row = 0;
  for (int r = 0; r < p.R; ++r) {
    int m = p.sizes[r];
    if (kt > 0) {
      p.X.block(row, 0, m, kt) = p.X_blocks[r];
      p.X.block(row, kt, m, kt) = p.W_blocks[r] * p.X_blocks[r];
    }
    p.X.block(row, 2 * kt + r, m, 1).setOnes();
    row += m;
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(p.X);
  qr.setThreshold(1e-10);
  if (qr.rank() < p.X.cols())
    throw std::invalid_argument(
        "make_network_panel: assembled design is rank deficient");
  return p;
}

LllSystem lll_transform(const NetworkPanel& panel, std::uint64_t basis_seed) {
  LllSystem sys;
  std::vector<WeightsMatrix> wstar;
  std::vector<Eigen::MatrixXd> xstar, wxstar;
  int row = 0, n_star = 0;
  for (int r = 0; r < panel.R; ++r) {
    int m = panel.sizes[r];
    const Eigen::MatrixXd& Wr = panel.W_blocks[r];
    Eigen::VectorXd iota = Eigen::VectorXd::Ones(m);
    if ((Wr * iota - iota).lpNorm<Eigen::Infinity>() > 1e-10)
      throw std::runtime_error(
          "lll_transform: transformation inapplicable, network " +
          std::to_string(r) + " does not have unit row sums");
    // Orthonormal completion of iota/sqrt(m): last m-1 columns of the full
    // Householder Q span the centering projector's range.
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(iota);
    Eigen::MatrixXd Q =
        qr.householderQ() * Eigen::MatrixXd::Identity(m, m);
    Eigen::MatrixXd F = Q.rightCols(m - 1);
    if (basis_seed != 0) {
      Rng rng(basis_seed, static_cast<std::uint64_t>(r));
      Eigen::MatrixXd Z(m - 1, m - 1);
      for (int i = 0; i < m - 1; ++i)
        for (int j = 0; j < m - 1; ++j) Z(i, j) = rng.normal();
      Eigen::HouseholderQR<Eigen::MatrixXd> rq(Z);
      F = F * (rq.householderQ() * Eigen::MatrixXd::Identity(m - 1, m - 1));
    }
    sys.F.push_back(F);
    wstar.push_back(
        {F.transpose() * Wr * F, Normalization::none, {}});
    if (panel.k_tilde > 0) {
      xstar.push_back(F.transpose() * panel.X_blocks[r]);
      wxstar.push_back(wstar.back().entries * xstar.back());
    }
    row += m;
    n_star += m - 1;
  }
  sys.W = block_diag(wstar);
  sys.y.resize(n_star);
  sys.X.resize(n_star, 2 * panel.k_tilde);
  int srow = 0;
  row = 0;
  for (int r = 0; r < panel.R; ++r) {
    int m = panel.sizes[r];
    sys.y.segment(srow, m - 1) =
        sys.F[r].transpose() * panel.y.segment(row, m);
    if (panel.k_tilde > 0) {
      sys.X.block(srow, 0, m - 1, panel.k_tilde) = xstar[r];
      sys.X.block(srow, panel.k_tilde, m - 1, panel.k_tilde) = wxstar[r];
    }
    srow += m - 1;
    row += m;
  }
  return sys;
}

double lll_loglik(const LllSystem& sys, double sigma2, double lambda) {
  if (sigma2 <= 0.0)
    throw std::invalid_argument("lll_loglik: sigma2 must be positive");
  int n = static_cast<int>(sys.y.size());
  Eigen::MatrixXd S =
      Eigen::MatrixXd::Identity(n, n) - lambda * sys.W.entries;
  Eigen::VectorXd Sy = S * sys.y;
  if (sys.X.cols() > 0) {
    Eigen::MatrixXd Qx = thin_q(sys.X);
    Sy -= Qx * (Qx.transpose() * Sy);
  }
  return -0.5 * n * std::log(sigma2) + log_abs_det(S) -
         0.5 * Sy.squaredNorm() / sigma2;
}

double lll_loglik(const NetworkPanel& panel, double sigma2, double lambda) {
  return lll_loglik(lll_transform(panel), sigma2, lambda);
}

EstimateResult lll_estimator(const LllSystem& sys,
                             const std::optional<EstimateContext>& ctx) {
  SarData d(sys.y, sys.X, sys.W);
  EstimateResult r = qmle(d, ctx);
  r.method = Method::lll;
  return r;
}

EstimateResult lll_estimator(const NetworkPanel& panel) {
  return lll_estimator(lll_transform(panel));
}

namespace {

// Shared pieces of the error-model likelihoods at a given lambda:
// A = S(lambda), thin Q of AX, y'U y and the two determinant terms.
struct SemParts {
  double yUy;
  double log_abs_det_A;
  double half_log_det_XAAX;  // (1/2) log det(X'A'AX)
};

SemParts sem_parts(const SemModel& m, double lambda) {
  int n = m.n(), k = m.k();
  Eigen::MatrixXd A =
      Eigen::MatrixXd::Identity(n, n) - lambda * m.W.entries;
  SemParts p;
  p.log_abs_det_A = log_abs_det(A);
  Eigen::VectorXd Ay = A * m.y;
  p.half_log_det_XAAX = 0.0;
  if (k > 0) {
    Eigen::MatrixXd AX = A * m.X;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(AX);
    qr.setThreshold(1e-12);
    if (qr.rank() < k)
      throw std::runtime_error("sem: S(lambda)X is rank deficient");
    for (int i = 0; i < k; ++i)
      p.half_log_det_XAAX += std::log(std::abs(qr.matrixR()(i, i)));
    Eigen::MatrixXd Qx = thin_q(AX);
    Ay -= Qx * (Qx.transpose() * Ay);
  }
  p.yUy = Ay.squaredNorm();
  return p;
}

}  // namespace

double sem_profile_loglik(const SemModel& m, double sigma2, double lambda) {
  if (sigma2 <= 0.0)
    throw std::invalid_argument("sem_profile_loglik: sigma2 must be positive");
  auto p = sem_parts(m, lambda);
  return -0.5 * m.n() * std::log(sigma2) + p.log_abs_det_A -
         0.5 * p.yUy / sigma2;
}

double sem_adjusted_loglik(const SemModel& m, double sigma2, double lambda) {
  if (sigma2 <= 0.0)
    throw std::invalid_argument("sem_adjusted_loglik: sigma2 must be positive");
  auto p = sem_parts(m, lambda);
  return -0.5 * (m.n() - m.k()) * std::log(sigma2) -
         0.5 * p.yUy / sigma2 + p.log_abs_det_A - p.half_log_det_XAAX;
}

double sem_sigma2_a(const SemModel& m, double lambda) {
  return sem_parts(m, lambda).yUy / (m.n() - m.k());
}

double sem_adjusted_profile(const SemModel& m, double lambda) {
  auto p = sem_parts(m, lambda);
  return -0.5 * (m.n() - m.k()) * std::log(p.yUy) + p.log_abs_det_A -
         p.half_log_det_XAAX;
}

Eigen::Vector2d sem_adjusted_score(const SemModel& m, double sigma2,
                                   double lambda) {
  int n = m.n(), k = m.k();
  const Eigen::MatrixXd& W = m.W.entries;
  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n, n) - lambda * W;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
  auto p = sem_parts(m, lambda);

  // s_a1 = y'Uy/(2 sigma^4) - (n-k)/(2 sigma^2).
  double s1 = 0.5 * p.yUy / (sigma2 * sigma2) -
              0.5 * (n - k) / sigma2;

  // s_a2 = -tr(G) + (1/sigma^2) z'W'Az + tr((X'A'AX)^{-1} X'W'AX), with
  // z = Sigma U y and Sigma = (A'A)^{-1}; the three pieces differentiate the
  // determinant, the quadratic form, and the design-volume terms.
  Eigen::MatrixXd Ainv = lu.inverse();
  double trG = (W.cwiseProduct(Ainv.transpose())).sum();
  Eigen::VectorXd Ay = A * m.y;
  Eigen::VectorXd Uy;
  if (k > 0) {
    Eigen::MatrixXd AX = A * m.X;
    Eigen::MatrixXd Qx = thin_q(AX);
    Eigen::VectorXd r = Ay - Qx * (Qx.transpose() * Ay);
    Uy = A.transpose() * r;
  } else {
    Uy = A.transpose() * Ay;
  }
  Eigen::VectorXd z = lu.solve(A.transpose().partialPivLu().solve(Uy));
  double s2 = -trG + (z.dot(W.transpose() * (A * z))) / sigma2;
  if (k > 0) {
    Eigen::MatrixXd AX = A * m.X;
    Eigen::MatrixXd C = AX.transpose() * AX;
    Eigen::MatrixXd D = m.X.transpose() * W.transpose() * AX;
    s2 += C.ldlt().solve(D).trace();
  }
  return {s1, s2};
}

bool invariant_subspace_check(const Eigen::MatrixXd& W,
                              const Eigen::MatrixXd& X, double tol) {
  if (X.cols() == 0) return true;
  Eigen::MatrixXd WX = W * X;
  double scale = WX.norm();
  if (scale == 0.0) return true;
  Eigen::MatrixXd Qx = thin_q(X);
  Eigen::MatrixXd M_WX = WX - Qx * (Qx.transpose() * WX);
  return M_WX.norm() < tol * scale;
}

}  // namespace sar
