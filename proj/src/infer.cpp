#include "sar/infer.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "sar/optim.hpp"

namespace sar {

namespace {

constexpr double kSqrt2Pi = 2.5066282746310005;

// Inverse standard normal cdf (Acklam's rational approximation, ~1e-9
// absolute accuracy, ample for interval multipliers).
double norm_ppf(double p) {
  if (p <= 0.0 || p >= 1.0)
    throw std::invalid_argument("norm_ppf: p must be in (0,1)");
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  double q, r;
  if (p < plow) {
    q = std::sqrt(-2 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q +
            c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  }
  if (p > 1 - plow) return -norm_ppf(1 - p);
  q = p - 0.5;
  r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r +
          a[5]) *
         q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
}

Eigen::MatrixXd dense_G(const Eigen::MatrixXd& W, double lambda) {
  const Eigen::Index n = W.rows();
  Eigen::MatrixXd S = Eigen::MatrixXd::Identity(n, n) - lambda * W;
  return W * S.partialPivLu().inverse();
}

}  // namespace

double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }
double norm_pdf(double x) { return std::exp(-0.5 * x * x) / kSqrt2Pi; }

QformSpec build_qform(const SarData& data, double z, double lambda,
                      const Eigen::VectorXd& beta, double sigma2) {
  const int n = data.n(), k = data.k();
  const Eigen::MatrixXd& W = data.W().entries;
  Eigen::MatrixXd Sz = Eigen::MatrixXd::Identity(n, n) - z * W;
  Eigen::MatrixXd Sl = Eigen::MatrixXd::Identity(n, n) - lambda * W;
  Eigen::PartialPivLU<Eigen::MatrixXd> luz(Sz), lul(Sl);
  if (std::abs(luz.determinant()) < 1e-300 ||
      std::abs(lul.determinant()) < 1e-300)
    throw std::invalid_argument("build_qform: singular S");

  Eigen::MatrixXd G = W * luz.inverse();
  Eigen::MatrixXd Mx = annihilator(data.X());
  double t1 = (Mx * G).trace();
  Eigen::MatrixXd R =
      Mx * (G - (t1 / (n - k)) * Eigen::MatrixXd::Identity(n, n));
  // A = S(z) S^-1(lambda); B = 1/2 A'(R + R')A, exactly symmetric.
  Eigen::MatrixXd A = Sz * lul.inverse();
  Eigen::MatrixXd B = 0.5 * A.transpose() * (R + R.transpose()) * A;
  B = 0.5 * (B + B.transpose());

  QformSpec spec;
  spec.B = B;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(B);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("build_qform: eigensolver failed");
  spec.b = es.eigenvalues();
  spec.c = es.eigenvectors().transpose() *
           (data.X() * beta / std::sqrt(sigma2));
  return spec;
}

double cgf(const QformSpec& spec, double s, int order) {
  const Eigen::Index n = spec.b.size();
  double bmin = spec.b(0), bmax = spec.b(n - 1);
  if ((bmin < 0.0 && s <= 0.5 / bmin) || (bmax > 0.0 && s >= 0.5 / bmax))
    throw std::invalid_argument("cgf: s outside the convergence strip");
  double out = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double b = spec.b(i), c2 = spec.c(i) * spec.c(i);
    double d = 1.0 - 2.0 * s * b;
    switch (order) {
      case 0:
        out += -0.5 * std::log(d) + c2 * s * b / d;
        break;
      case 1:
        out += b / d + c2 * b / (d * d);
        break;
      case 2:
        out += 2 * b * b / (d * d) + 4 * c2 * b * b / (d * d * d);
        break;
      case 3:
        out += 8 * b * b * b / (d * d * d) +
               24 * c2 * b * b * b / (d * d * d * d);
        break;
      default:
        throw std::invalid_argument("cgf: order must be 0..3");
    }
  }
  return out;
}

CdfApprox lr_cdf_at_zero(const QformSpec& spec) {
  CdfApprox out;
  const Eigen::Index n = spec.b.size();
  double bmin = spec.b(0), bmax = spec.b(n - 1);
  // Definite forms put all mass on one side of zero.
  if (bmin >= 0.0) {
    out.prob = 0.0;
    return out;
  }
  if (bmax <= 0.0) {
    out.prob = 1.0;
    return out;
  }
  double edge_lo = 0.5 / bmin, edge_hi = 0.5 / bmax;  // edge_lo < 0 < edge_hi

  // Bracket the root of K' (increasing, -inf to +inf across the strip).
  double slo = 0.0, shi = 0.0;
  for (double f = 1e-4; f >= 1e-14; f *= 1e-2) {
    slo = edge_lo * (1.0 - f);
    if (cgf(spec, slo, 1) < 0.0) break;
  }
  for (double f = 1e-4; f >= 1e-14; f *= 1e-2) {
    shi = edge_hi * (1.0 - f);
    if (cgf(spec, shi, 1) > 0.0) break;
  }
  if (!(cgf(spec, slo, 1) < 0.0 && cgf(spec, shi, 1) > 0.0))
    throw std::runtime_error("lr_cdf_at_zero: failed to bracket saddlepoint");

  // Safeguarded Newton on K'.
  double s = 0.0;
  if (s <= slo || s >= shi) s = 0.5 * (slo + shi);
  for (int it = 0; it < 200; ++it) {
    double g = cgf(spec, s, 1);
    if (g < 0.0)
      slo = s;
    else
      shi = s;
    if (std::abs(g) < 1e-10) break;
    double step = g / cgf(spec, s, 2);
    double next = s - step;
    if (next <= slo || next >= shi) next = 0.5 * (slo + shi);
    if (next == s) break;
    s = next;
  }
  out.s_hat = s;

  if (std::abs(s) < 1e-5) {
    out.branch = CdfBranch::mean_point;
    double k2 = cgf(spec, 0.0, 2), k3 = cgf(spec, 0.0, 3);
    out.prob = 0.5 + k3 / (6.0 * kSqrt2Pi * std::pow(k2, 1.5));
  } else {
    out.branch = CdfBranch::general;
    double k0 = cgf(spec, s, 0);
    double w = (s > 0 ? 1.0 : -1.0) * std::sqrt(std::max(0.0, -2.0 * k0));
    double u = s * std::sqrt(cgf(spec, s, 2));
    out.w_hat = w;
    out.u_hat = u;
    out.prob = norm_cdf(w) + norm_pdf(w) * (1.0 / w - 1.0 / u);
  }
  if (out.prob < 0.0 || out.prob > 1.0) {
    out.clamped = true;
    out.prob = std::min(1.0, std::max(0.0, out.prob));
  }
  return out;
}

double cdf_hat(const SarData& data, double z, double lambda) {
  Eigen::VectorXd beta = beta_hat(data, lambda);
  double s2 = sigma2_aml(data, lambda);
  return lr_cdf_at_zero(build_qform(data, z, lambda, beta, s2)).prob;
}

Interval saddlepoint_ci(const SarData& data, double lambda_obs, double alpha1,
                        double alpha2,
                        const std::optional<EstimateContext>& ctx) {
  EstimateContext c =
      ctx ? *ctx : make_context(data.W().entries, data.X());
  double pad = 1e-8 * (c.adjusted.hi - c.adjusted.lo);
  double lo = c.adjusted.lo + pad, hi = c.adjusted.hi - pad;

  // cdf_hat(lambda_obs; lambda) decreases in lambda: solve for the levels
  // 1-alpha1 (lower bound) and alpha2 (upper bound) by bracketed scan.
  auto solve_level = [&](double target, double& root, bool& at_edge,
                         bool from_low) {
    const int scan = 96;
    double prev_x = lo, prev_g = cdf_hat(data, lambda_obs, lo) - target;
    if (prev_g <= 0.0) {
      // Level already undershot at the lower end.
      root = lo;
      at_edge = true;
      return;
    }
    for (int i = 1; i < scan; ++i) {
      double x = lo + (hi - lo) * i / (scan - 1.0);
      double g = cdf_hat(data, lambda_obs, x) - target;
      if (g <= 0.0) {
        root = brent_root(
            [&](double lam) { return cdf_hat(data, lambda_obs, lam) - target; },
            prev_x, x, 1e-6);
        at_edge = false;
        return;
      }
      prev_x = x;
      prev_g = g;
    }
    root = hi;
    at_edge = true;
    (void)from_low;
  };

  Interval iv;
  if (alpha1 <= 0.0) {
    iv.lo = c.adjusted.lo;
    iv.lo_unbounded = true;
  } else {
    solve_level(1.0 - alpha1, iv.lo, iv.lo_at_edge, true);
  }
  solve_level(alpha2, iv.hi, iv.hi_at_edge, false);
  return iv;
}

double wald_variance_ml(const SarData& data, double lambda,
                        const Eigen::VectorXd& beta, double sigma2) {
  const int n = data.n(), k = data.k();
  Eigen::MatrixXd G = dense_G(data.W().entries, lambda);
  Eigen::VectorXd gxb = G * (data.X() * beta);
  double trG = G.trace();
  double trGG = (G * G).trace() + (G.transpose() * G).trace();
  Eigen::MatrixXd info(k + 2, k + 2);
  // Order (lambda, beta, sigma2).
  info(0, 0) = gxb.squaredNorm() / sigma2 + trGG;
  info.block(0, 1, 1, k) = (gxb.transpose() * data.X()) / sigma2;
  info.block(1, 0, k, 1) = info.block(0, 1, 1, k).transpose();
  info.block(1, 1, k, k) = data.X().transpose() * data.X() / sigma2;
  info(0, k + 1) = info(k + 1, 0) = trG / sigma2;
  info.block(1, k + 1, k, 1).setZero();
  info.block(k + 1, 1, 1, k).setZero();
  info(k + 1, k + 1) = n / (2.0 * sigma2 * sigma2);
  Eigen::MatrixXd cov = info.inverse();
  double v = cov(0, 0);
  if (!(v > 0.0) || !std::isfinite(v))
    throw std::runtime_error("wald_variance_ml: information matrix singular");
  return v;
}

double wald_variance_aml(const SarData& data, double lambda,
                         const Eigen::VectorXd& beta, double sigma2) {
  const int n = data.n(), k = data.k();
  Eigen::MatrixXd G = dense_G(data.W().entries, lambda);
  Eigen::MatrixXd Mx = annihilator(data.X());
  Eigen::VectorXd gxb = G * (data.X() * beta);
  double t1 = data.trace_MG(lambda);
  double t2 = data.trace_MG2(lambda);
  double trGMG = (G.transpose() * Mx * G).trace();
  double info = gxb.dot(Mx * gxb) / sigma2 + trGMG + t2 -
                2.0 * t1 * t1 / (n - k);
  if (!(info > 0.0) || !std::isfinite(info))
    throw std::runtime_error("wald_variance_aml: information not positive");
  return 1.0 / info;
}

Interval wald_ci(const SarData& data, const EstimateResult& r, double level,
                 bool right_sided) {
  bool adjusted =
      r.method == Method::aqmle || r.method == Method::aqmle_censored;
  double v = adjusted
                 ? wald_variance_aml(data, r.lambda_hat, r.beta, r.sigma2_hat)
                 : wald_variance_ml(data, r.lambda_hat, r.beta, r.sigma2_hat);
  double se = std::sqrt(v);
  Interval iv;
  if (right_sided) {
    double zq = norm_ppf(level);
    iv.lo = -std::numeric_limits<double>::infinity();
    iv.lo_unbounded = true;
    iv.hi = r.lambda_hat + zq * se;
  } else {
    double zq = norm_ppf(0.5 + level / 2.0);
    iv.lo = r.lambda_hat - zq * se;
    iv.hi = r.lambda_hat + zq * se;
  }
  return iv;
}

}  // namespace sar
