#include "sar/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>

namespace sar {

namespace {

double matrix_scale(const Eigen::MatrixXd& W) {
  double s = W.norm();
  return s > 0.0 ? s : 1.0;
}

}  // namespace

std::vector<RealEigenvalue> real_eigen_structure(const Eigen::MatrixXd& W,
                                                 const SpectralTols& tols) {
  if (W.rows() != W.cols())
    throw std::invalid_argument("real_eigen_structure: W must be square");
  const double scale = matrix_scale(W);
  Eigen::EigenSolver<Eigen::MatrixXd> es(W, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("real_eigen_structure: eigensolver failed");

  std::vector<double> reals;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    auto ev = es.eigenvalues()(i);
    if (std::abs(ev.imag()) < tols.imag * scale) reals.push_back(ev.real());
  }
  std::sort(reals.begin(), reals.end());

  std::vector<RealEigenvalue> out;
  const Eigen::Index n = W.rows();
  std::size_t i = 0;
  while (i < reals.size()) {
    std::size_t j = i + 1;
    while (j < reals.size() && reals[j] - reals[j - 1] < tols.cluster * scale)
      ++j;
    RealEigenvalue r;
    r.algebraic_mult = static_cast<int>(j - i);
    double sum = 0.0;
    for (std::size_t t = i; t < j; ++t) sum += reals[t];
    r.value = sum / r.algebraic_mult;
    if (r.algebraic_mult == 1) {
      // A simple eigenvalue is always semisimple; skip the rank test.
      r.geometric_mult = 1;
      r.semisimple = true;
    } else {
      // Geometric multiplicity = nullity of W - omega I at numeric rank.
      Eigen::BDCSVD<Eigen::MatrixXd> svd(
          W - r.value * Eigen::MatrixXd::Identity(n, n));
      double smax = svd.singularValues()(0);
      int rank = 0;
      for (Eigen::Index t = 0; t < svd.singularValues().size(); ++t)
        if (svd.singularValues()(t) > tols.rank * smax) ++rank;
      r.geometric_mult = static_cast<int>(n) - rank;
      r.semisimple = (r.geometric_mult == r.algebraic_mult);
    }
    out.push_back(r);
    i = j;
  }
  return out;
}

SpectralProjector spectral_projector(const Eigen::MatrixXd& W,
                                     const RealEigenvalue& omega,
                                     const SpectralTols& tols) {
  if (!omega.semisimple)
    throw std::invalid_argument(
        "spectral_projector: eigenvalue is not semisimple");
  const Eigen::Index n = W.rows();
  const int g = omega.geometric_mult;
  // Jacobi rather than divide-and-conquer: the latter mishandles spectra
  // with very high multiplicity, and this routine runs only a handful of
  // times per model setup.
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(
      W - omega.value * Eigen::MatrixXd::Identity(n, n),
      Eigen::ComputeFullU | Eigen::ComputeFullV);
  // Right null space spans the eigenspace; left null space is orthogonal to
  // col(W - omega I). The projector onto the former along the latter's
  // orthocomplement is N (L'N)^-1 L'.
  Eigen::MatrixXd N = svd.matrixV().rightCols(g);
  Eigen::MatrixXd L = svd.matrixU().rightCols(g);
  Eigen::MatrixXd LtN = L.transpose() * N;
  Eigen::JacobiSVD<Eigen::MatrixXd> cond(LtN);
  double smin = cond.singularValues().minCoeff();
  if (smin < 1e-10)
    throw std::runtime_error(
        "spectral_projector: ill-conditioned eigenvalue (left/right "
        "eigenspaces nearly orthogonal)");
  SpectralProjector p;
  p.eigenvalue = omega.value;
  p.Q = N * LtN.inverse() * L.transpose();
  (void)tols;
  return p;
}

Eigen::MatrixXd thin_q(const Eigen::MatrixXd& X) {
  if (X.cols() == 0) return Eigen::MatrixXd(X.rows(), 0);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(X);
  Eigen::MatrixXd Q = qr.householderQ() *
                      Eigen::MatrixXd::Identity(X.rows(), X.cols());
  return Q;
}

Eigen::MatrixXd annihilator(const Eigen::MatrixXd& X) {
  Eigen::MatrixXd Qx = thin_q(X);
  return Eigen::MatrixXd::Identity(X.rows(), X.rows()) - Qx * Qx.transpose();
}

TraceMQ trace_MQ(const Eigen::MatrixXd& X, const SpectralProjector& proj,
                 const SpectralTols& tols) {
  const Eigen::Index n = proj.Q.rows();
  Eigen::MatrixXd Qx = thin_q(X);
  // tr(M_X Q) = tr(Q) - tr(Qx' Q Qx).
  double v = proj.Q.trace() - (Qx.transpose() * proj.Q * Qx).trace();
  TraceMQ t;
  t.value = v;
  double band = tols.trace_zero * static_cast<double>(n);
  t.sign = (v > band)    ? TraceSign::positive
           : (v < -band) ? TraceSign::negative
                         : TraceSign::zero;
  return t;
}

std::optional<double> check_assumption1(const Eigen::MatrixXd& W,
                                        const Eigen::MatrixXd& X,
                                        double rel_tol) {
  return check_assumption1(W, X, real_eigen_structure(W), rel_tol);
}

std::optional<double> check_assumption1(const Eigen::MatrixXd& W,
                                        const Eigen::MatrixXd& X,
                                        const std::vector<RealEigenvalue>& evs,
                                        double rel_tol) {
  Eigen::MatrixXd Mx = annihilator(X);
  for (const auto& ev : evs) {
    Eigen::MatrixXd D =
        ev.value * Eigen::MatrixXd::Identity(W.rows(), W.rows()) - W;
    if ((Mx * D).norm() < rel_tol * D.norm()) return ev.value;
  }
  return std::nullopt;
}

namespace {

// Real eigenvalues split by sign, ordered walking outward from 0 in
// reciprocal space: positives descending (1/omega ascending), negatives
// ascending (1/omega descending).
std::vector<RealEigenvalue> positive_outward(
    const std::vector<RealEigenvalue>& evs) {
  std::vector<RealEigenvalue> v;
  for (const auto& e : evs)
    if (e.value > 1e-12) v.push_back(e);
  std::sort(v.begin(), v.end(),
            [](const auto& a, const auto& b) { return a.value > b.value; });
  return v;
}

std::vector<RealEigenvalue> negative_outward(
    const std::vector<RealEigenvalue>& evs) {
  std::vector<RealEigenvalue> v;
  for (const auto& e : evs)
    if (e.value < -1e-12) v.push_back(e);
  std::sort(v.begin(), v.end(),
            [](const auto& a, const auto& b) { return a.value < b.value; });
  return v;
}

}  // namespace

ParamSpace lambda_space(const Eigen::MatrixXd& W, const SpectralTols& tols) {
  return lambda_space(real_eigen_structure(W, tols));
}

ParamSpace lambda_space(const std::vector<RealEigenvalue>& evs) {
  auto pos = positive_outward(evs);
  auto neg = negative_outward(evs);
  if (pos.empty() || neg.empty())
    throw std::runtime_error(
        "lambda_space: W needs at least one positive and one negative real "
        "eigenvalue");
  ParamSpace s;
  s.lo = 1.0 / neg.front().value;
  s.hi = 1.0 / pos.front().value;
  s.lo_class = s.hi_class = EndpointClass::divergent;
  return s;
}

ParamSpace adjusted_space(const Eigen::MatrixXd& W, const Eigen::MatrixXd& X,
                          const SpectralTols& tols) {
  return adjusted_space(W, X, real_eigen_structure(W, tols), tols);
}

ParamSpace adjusted_space(const Eigen::MatrixXd& W, const Eigen::MatrixXd& X,
                          const std::vector<RealEigenvalue>& evs,
                          const SpectralTols& tols) {
  if (auto bad = check_assumption1(W, X, evs))
    throw std::runtime_error(
        "adjusted_space: identification assumption violated at omega = " +
        std::to_string(*bad));
  auto pos = positive_outward(evs);
  auto neg = negative_outward(evs);
  if (pos.empty() || neg.empty())
    throw std::runtime_error(
        "adjusted_space: W needs at least one positive and one negative "
        "real eigenvalue");

  ParamSpace s;
  // Walk outward on one side: removable singularities are crossed and
  // recorded, the first divergent (or unbounded-above) eigenvalue stops the
  // walk. Non-semisimple eigenvalues are treated as divergent.
  auto walk = [&](const std::vector<RealEigenvalue>& side, double& endpoint,
                  EndpointClass& cls, const char* name) {
    for (const auto& ev : side) {
      endpoint = 1.0 / ev.value;
      if (!ev.semisimple) {
        cls = EndpointClass::divergent;
        return;
      }
      auto t = trace_MQ(X, spectral_projector(W, ev, tols), tols);
      if (t.sign == TraceSign::positive) {
        cls = EndpointClass::divergent;
        return;
      }
      if (t.sign == TraceSign::negative) {
        cls = EndpointClass::unbounded_above;
        return;
      }
      s.interior_singularities.push_back(endpoint);
    }
    throw std::runtime_error(std::string("adjusted_space: no divergent ") +
                             name + " endpoint (Assumption 2 fails)");
  };
  walk(pos, s.hi, s.hi_class, "upper");
  walk(neg, s.lo, s.lo_class, "lower");
  // Removable points recorded during the walks that ended up interior.
  std::sort(s.interior_singularities.begin(), s.interior_singularities.end());
  return s;
}

// ---------------------------------------------------------------------------

EigenCache::EigenCache(const Eigen::MatrixXd& W) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(W, /*computeEigenvectors=*/true);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("EigenCache: eigensolver failed");
  omega_ = es.eigenvalues();
  H_ = es.eigenvectors();
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(H_);
  Hinv_ = lu.inverse();
  double resid =
      (H_ * Hinv_ - Eigen::MatrixXcd::Identity(H_.rows(), H_.cols())).norm();
  diagonalizable_ = resid < 1e-6 * std::sqrt(static_cast<double>(H_.rows()));
}

double EigenCache::log_abs_det_S(double lambda) const {
  double s = 0.0;
  for (Eigen::Index i = 0; i < omega_.size(); ++i)
    s += std::log(std::abs(std::complex<double>(1.0, 0.0) -
                           lambda * omega_(i)));
  return s;
}

Eigen::VectorXcd EigenCache::eigenweights_MX(const Eigen::MatrixXd& Qx) const {
  // w = diag(H^-1 (I - Qx Qx') H) = 1 - rowwise <H^-1 Qx, (Qx' H)'>.
  if (Qx.cols() == 0) return Eigen::VectorXcd::Ones(omega_.size());
  Eigen::MatrixXcd A = Hinv_ * Qx;                  // n x k
  Eigen::MatrixXcd B = Qx.transpose() * H_;         // k x n
  Eigen::VectorXcd w =
      Eigen::VectorXcd::Ones(omega_.size()) -
      (A.array() * B.transpose().array()).rowwise().sum().matrix();
  return w;
}

double EigenCache::trace_MG(const Eigen::VectorXcd& w,
                            const Eigen::VectorXcd& omega, double lambda) {
  std::complex<double> s(0.0, 0.0);
  for (Eigen::Index i = 0; i < omega.size(); ++i) {
    std::complex<double> d = 1.0 - lambda * omega(i);
    // Removable singularity: the weight vanishes with the denominator.
    if (std::abs(d) < 1e-10 && std::abs(w(i)) < 1e-6) continue;
    s += w(i) * omega(i) / d;
  }
  return s.real();
}

double EigenCache::trace_MG2(const Eigen::VectorXcd& w,
                             const Eigen::VectorXcd& omega, double lambda) {
  std::complex<double> s(0.0, 0.0);
  for (Eigen::Index i = 0; i < omega.size(); ++i) {
    std::complex<double> d = 1.0 - lambda * omega(i);
    if (std::abs(d) < 1e-10 && std::abs(w(i)) < 1e-6) continue;
    std::complex<double> g = omega(i) / d;
    s += w(i) * g * g;
  }
  return s.real();
}

double EigenCache::log_det_term(const Eigen::VectorXcd& w,
                                const Eigen::VectorXcd& omega, double lambda) {
  // Re sum_i w_i log(1 - lambda omega_i) with the principal branch. Along
  // real lambda, 1 - lambda*omega_i only touches the branch cut when
  // omega_i is real, and there Im(w_i) vanishes, so the expression is
  // continuous wherever the adjusted objective is.
  double s = 0.0;
  for (Eigen::Index i = 0; i < omega.size(); ++i) {
    std::complex<double> z = std::complex<double>(1.0, 0.0) -
                             lambda * omega(i);
    // A removable singularity pairs |z| -> 0 with w_i -> 0; skip the term
    // rather than produce 0 * (-inf).
    if (std::abs(z) < 1e-300) continue;
    s += w(i).real() * std::log(std::abs(z)) -
         w(i).imag() * std::arg(z);
  }
  return s;
}

double trace_MG_direct(const Eigen::MatrixXd& W, const Eigen::MatrixXd& Mx,
                       double lambda) {
  const Eigen::Index n = W.rows();
  Eigen::MatrixXd S = Eigen::MatrixXd::Identity(n, n) - lambda * W;
  Eigen::MatrixXd Sinv = S.partialPivLu().inverse();
  return (Mx * W * Sinv).trace();
}

C1Result check_C1(const Eigen::MatrixXd& W, const Eigen::MatrixXd& X,
                  const ParamSpace& space, int grid_size) {
  const double n = static_cast<double>(W.rows());
  const double k = static_cast<double>(X.cols());
  EigenCache cache(W);
  Eigen::MatrixXd Qx = thin_q(X);
  Eigen::VectorXcd w = cache.eigenweights_MX(Qx);
  const double width = space.hi - space.lo;
  const double margin = 1e-4 * width;
  C1Result r;
  for (int i = 1; i < grid_size; ++i) {
    double lam = space.lo + width * i / grid_size;
    bool near_sing = false;
    for (double sng : space.interior_singularities)
      if (std::abs(lam - sng) < margin) near_sing = true;
    if (near_sing) continue;
    double t1 = EigenCache::trace_MG(w, cache.omega(), lam);
    double t2 = EigenCache::trace_MG2(w, cache.omega(), lam);
    if ((n - k) * t2 - t1 * t1 <= 0.0) {
      r.holds = false;
      r.fail_at = lam;
      return r;
    }
  }
  return r;
}

}  // namespace sar
