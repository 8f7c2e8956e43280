/* Acceptance gate: twelve end-to-end criteria, one pass/fail line each.
 *
 * Statistical criteria run the published simulation designs at 10^4-10^5
 * replications and compare against the published numbers within Monte Carlo
 * tolerances (3 standard errors unless the criterion states otherwise, plus
 * half a unit in the last published digit for rounding). Exact criteria
 * (identities, gradients, equivalences) use fixed numeric tolerances.
 *
 * Exit code = number of failed criteria.
 */
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <fstream>
#include <functional>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "sar/estimate.hpp"
#include "sar/infer.hpp"
#include "sar/io.hpp"
#include "sar/mc.hpp"
#include "sar/model.hpp"
#include "sar/panels.hpp"
#include "sar/rng.hpp"
#include "sar/spectral.hpp"
#include "sar/weights.hpp"

using namespace sar;

namespace {

int g_failures = 0;

void report(int num, const char* name, bool pass, const std::string& detail) {
  std::printf("criterion %2d [%s]: %s%s%s\n", num, name,
              pass ? "PASS" : "FAIL", detail.empty() ? "" : " — ",
              detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

void run(int num, const char* name,
         const std::function<std::pair<bool, std::string>()>& body) {
  auto t0 = std::chrono::steady_clock::now();
  bool pass = false;
  std::string detail;
  try {
    auto r = body();
    pass = r.first;
    detail = r.second;
  } catch (const std::exception& e) {
    detail = std::string("exception: ") + e.what();
  }
  auto t1 = std::chrono::steady_clock::now();
  char buf[64];
  std::snprintf(buf, sizeof buf, " (%.0f s)",
                std::chrono::duration<double>(t1 - t0).count());
  report(num, name, pass, detail + buf);
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

WeightsMatrix random_row_w(int n, int h, double p, std::uint64_t seed) {
  return normalize(watts_strogatz(n, h, p, seed), Normalization::row);
}

// Random instance: row-normalized small-world W, intercept + normal columns.
struct Instance {
  WeightsMatrix W;
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
};

Instance random_instance(int n, int k, double lambda, std::uint64_t seed) {
  Instance ins;
  ins.W = random_row_w(n, 3, 0.3, seed);
  Rng rng(seed, 1);
  ins.X.resize(n, k);
  ins.X.col(0).setOnes();
  for (int j = 1; j < k; ++j)
    for (int i = 0; i < n; ++i) ins.X(i, j) = rng.normal();
  SarParams par{lambda, Eigen::VectorXd::Ones(k), 1.0};
  ins.y = simulate_y(ins.W.entries, ins.X, par, ErrorDist::normal, rng);
  return ins;
}

// ---------------------------------------------------------------------------

std::pair<bool, std::string> table1_cells() {
  struct Cell {
    double p, lam;
    int h;
    double bias_ml, sd_ml, bias_aml, sd_aml;
    bool check_frac;
    double frac;
    std::uint64_t seed;
  };
  // For p > 0 the published results are conditional on one drawn graph;
  // the seeds below give realizations whose second-eigenvalue reciprocal
  // matches the published value (1.15 and 7.27).
  const std::vector<Cell> cells = {
      {0.0, 0.5, 5, -0.046, 0.095, -0.015, 0.094, false, 0.0, 1},
      {0.0, 0.5, 10, -0.105, 0.153, -0.034, 0.145, false, 0.0, 1},
      {0.2, 0.9, 5, -0.035, 0.050, -0.009, 0.053, false, 0.0, 39},
      {1.0, 0.9, 50, -0.739, 0.390, -0.011, 0.704, true, 44.14, 37},
  };
  const int N = 10000;
  bool ok = true;
  std::string detail;
  for (const auto& c : cells) {
    ExperimentConfig cfg;
    cfg.p = c.p;
    cfg.h = c.h;
    cfg.lambda = c.lam;
    cfg.reps = N;
    cfg.seed = c.seed;
    cfg.methods = {Method::qmle, Method::aqmle};
    SummaryRow r = run_bias_experiment(cfg);
    const auto& ml = r.estimators[0];
    const auto& am = r.estimators[1];
    auto close = [&](double got, double pub, double sd_pub, bool is_sd) {
      double se = is_sd ? sd_pub / std::sqrt(2.0 * N) : sd_pub / std::sqrt(N);
      return std::abs(got - pub) <= 3.0 * se + 0.0005;
    };
    bool cell_ok = close(ml.bias, c.bias_ml, c.sd_ml, false) &&
                   close(ml.sd, c.sd_ml, c.sd_ml, true) &&
                   close(am.bias, c.bias_aml, c.sd_aml, false) &&
                   close(am.sd, c.sd_aml, c.sd_aml, true);
    if (c.check_frac)
      cell_ok = cell_ok && std::abs(100.0 * am.frac_gt1 - c.frac) <= 2.0;
    if (!cell_ok) {
      ok = false;
      detail += fmt("(p=%g,h=%d,l=%g): ml %.4f(%.4f) vs %.3f(%.3f), aml "
                    "%.4f(%.4f) vs %.3f(%.3f)",
                    c.p, c.h, c.lam, ml.bias, ml.sd, c.bias_ml, c.sd_ml,
                    am.bias, am.sd, c.bias_aml, c.sd_aml);
      if (c.check_frac)
        detail += fmt(" frac %.2f vs %.2f", 100.0 * am.frac_gt1, c.frac);
      if (c.p > 0.0) detail += fmt(" [w2inv %.3f]", r.omega2_recip);
      detail += "; ";
    }
  }
  if (ok) detail = "4 cells within 3 mc se + rounding";
  return {ok, detail};
}

std::pair<bool, std::string> figure_fixture() {
  std::string dir = DATA_DIR;
  Eigen::MatrixXd Wm = read_matrix_auto(dir + "/figure_w.mtx");
  Eigen::VectorXd y = read_csv_matrix(dir + "/figure_y.csv").col(0);
  Eigen::MatrixXd X = read_csv_matrix(dir + "/figure_x.csv");
  WeightsMatrix W{Wm, Normalization::row, {}};
  EstimateContext ctx = make_context(Wm, X);
  SarData d(y, X, W);
  double lml = qmle(d, ctx).lambda_hat;
  double laml = adjusted_qmle(d, ctx).lambda_hat;
  bool ok = std::abs(lml - 0.478) <= 0.002 &&
            std::abs(laml - 0.506) <= 0.002 &&
            std::abs(ctx.lambda.lo - (-1.195)) <= 0.001 &&
            std::abs(ctx.lambda.hi - 1.0) <= 1e-9 &&
            std::abs(ctx.adjusted.lo - (-1.195)) <= 0.001 &&
            std::abs(ctx.adjusted.hi - 1.178) <= 0.001;
  // Boundedness across lambda = 1: the adjusted objective stays finite and
  // continuous while the profile objective diverges to -inf (log-rate in
  // the distance to the endpoint, so it keeps sinking as we approach).
  double la_lo = adjusted_loglik(d, 1.0 - 1e-3);
  double la_hi = adjusted_loglik(d, 1.0 + 1e-3);
  double l_ref = profile_loglik(d, lml);
  double d3 = l_ref - profile_loglik(d, 1.0 - 1e-3);
  double d6 = l_ref - profile_loglik(d, 1.0 - 1e-6);
  double d9 = l_ref - profile_loglik(d, 1.0 - 1e-9);
  ok = ok && std::isfinite(la_lo) && std::isfinite(la_hi) &&
       std::abs(la_hi - la_lo) < 0.5 && d6 > d3 && d9 > d6 && d9 > 20.0;
  return {ok, fmt("ml %.4f, aml %.4f, space (%.4f, %.4f), enlarged hi "
                  "%.4f, l drops at 1: %.0f/%.0f/%.0f, l_a jump: %.3g",
                  lml, laml, ctx.lambda.lo, ctx.lambda.hi, ctx.adjusted.hi,
                  d3, d6, d9, la_hi - la_lo)};
}

std::pair<bool, std::string> table4_cell() {
  struct Law {
    ErrorDist dist;
    const char* name;
    double sp_lo, sp_hi, wl_lo, wl_hi;
  };
  // Published: saddlepoint 0.946 (normal) / 0.948 (gamma); Wald on the
  // transformed system 0.921 / 0.922. Windows +-0.010 and +-0.015.
  const std::vector<Law> laws = {
      {ErrorDist::normal, "normal", 0.936, 0.956, 0.906, 0.936},
      {ErrorDist::gamma_centered, "gamma", 0.938, 0.958, 0.907, 0.937},
  };
  bool ok = true;
  std::string detail;
  for (const auto& law : laws) {
    ExperimentConfig cfg;
    cfg.design = DesignKind::network_fe;
    cfg.k_tilde = 10;
    cfg.R = 10;
    cfg.m = 20;
    cfg.h = 5;
    cfg.p = 0.2;
    cfg.lambda = 0.0;
    cfg.errors = law.dist;
    cfg.reps = 10000;
    SummaryRow r = run_coverage_experiment(cfg);
    double sp = 0.0, wl = 0.0;
    for (const auto& c : r.coverage) {
      if (c.name == "saddlepoint_aml") sp = c.two_sided;
      if (c.name == "wald_lll") wl = c.two_sided;
    }
    bool cell_ok = sp >= law.sp_lo && sp <= law.sp_hi && wl >= law.wl_lo &&
                   wl <= law.wl_hi;
    ok = ok && cell_ok;
    detail += fmt("%s: sp %.3f in [%.3f,%.3f], wald %.3f in [%.3f,%.3f]; ",
                  law.name, sp, law.sp_lo, law.sp_hi, wl, law.wl_lo,
                  law.wl_hi);
  }
  return {ok, detail};
}

std::pair<bool, std::string> unbiased_estimating_eq() {
  const int n = 50, reps = 100000;
  const double lam0 = 0.4;
  Instance base = random_instance(n, 3, lam0, 77);
  auto cache = std::make_shared<const EigenCache>(base.W.entries);
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(
      Eigen::MatrixXd::Identity(n, n) - lam0 * base.W.entries);
  Eigen::VectorXd mean_part = base.X * Eigen::VectorXd::Ones(3);
  const ErrorDist laws[] = {ErrorDist::normal, ErrorDist::gamma_centered,
                            ErrorDist::laplace, ErrorDist::chi2_3};
  const char* names[] = {"normal", "gamma", "laplace", "chi2"};
  bool ok = true;
  std::string detail;
  for (int l = 0; l < 4; ++l) {
    double sum = 0.0, sumsq = 0.0;
    for (int rep = 0; rep < reps; ++rep) {
      Rng rng(500 + l, rep);
      Eigen::VectorXd rhs = mean_part;
      for (int i = 0; i < n; ++i) rhs(i) += draw_error(rng, laws[l]);
      SarData d(lu.solve(rhs), base.X, base.W, cache);
      double q = estimating_fn(d, lam0);
      sum += q;
      sumsq += q * q;
    }
    double mean = sum / reps;
    double se = std::sqrt((sumsq / reps - mean * mean) / reps);
    bool law_ok = std::abs(mean) <= 4.0 * se;
    ok = ok && law_ok;
    detail += fmt("%s: %.4f (se %.4f); ", names[l], mean, se);
  }
  return {ok, detail};
}

std::pair<bool, std::string> df_identity() {
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    Instance ins = random_instance(40, 4, 0.3, 900 + t);
    SarData d(ins.y, ins.X, ins.W);
    Rng rng(900 + t, 2);
    double lam = rng.uniform(-0.8, 0.95);
    double lhs = sigma2_aml(d, lam);
    double rhs = 40.0 / (40.0 - 4.0) * sigma2_ml(d, lam);
    worst = std::max(worst, std::abs(lhs - rhs) / rhs);
  }
  return {worst < 1e-13, fmt("max rel dev %.2e over 100 pairs", worst)};
}

std::pair<bool, std::string> gradient_checks() {
  double worst = 0.0;
  const double h = 1e-6;
  for (int t = 0; t < 10; ++t) {
    Instance ins = random_instance(60, 3, 0.4, 1200 + t);
    SarData d(ins.y, ins.X, ins.W);
    EstimateContext ctx = make_context(ins.W.entries, ins.X);
    double lo = ctx.lambda.lo, hi = ctx.lambda.hi;
    for (int j = 1; j <= 50; ++j) {
      double lam = lo + (hi - lo) * j / 51.0;
      // Profile score: n(b - lam a)/qf - tr G.
      double s = d.n() * (d.qf_b() - lam * d.qf_a()) / d.resid_qf(lam) -
                 d.trace_G(lam);
      double fd =
          (profile_loglik(d, lam + h) - profile_loglik(d, lam - h)) / (2 * h);
      worst = std::max(worst, std::abs(s - fd) / std::max(1.0, std::abs(s)));
      if (ctx.adjusted.contains(lam)) {
        double sa = adjusted_score(d, lam);
        double fda =
            (adjusted_loglik(d, lam + h) - adjusted_loglik(d, lam - h)) /
            (2 * h);
        worst = std::max(worst,
                         std::abs(sa - fda) / std::max(1.0, std::abs(sa)));
      }
    }
  }
  return {worst < 1e-6, fmt("max rel dev %.2e (tol 1e-6)", worst)};
}

std::pair<bool, std::string> trichotomy() {
  // (i) generic X: the adjusted objective dives at the first singularity.
  bool ok = true;
  std::string detail;
  {
    // Group-interaction weights have a high-multiplicity negative
    // eigenvalue, so with a generic X (no intercept) the adjusted objective
    // dives steeply at the matching endpoint of its parameter space.
    WeightsMatrix W = group_interaction(25, 5);
    const int n = W.n();
    Rng rng(31, 0);
    Eigen::MatrixXd X(n, 3);
    for (int j = 0; j < 3; ++j)
      for (int i = 0; i < n; ++i) X(i, j) = rng.normal();
    SarParams par{0.3, Eigen::VectorXd::Ones(3), 1.0};
    Eigen::VectorXd y = simulate_y(W.entries, X, par, ErrorDist::normal, rng);
    SarData d(y, X, W);
    EstimateContext ctx = make_context(W.entries, X);
    double width = ctx.adjusted.hi - ctx.adjusted.lo;
    double peak = adjusted_loglik(d, adjusted_qmle(d, ctx).lambda_hat);
    double near = adjusted_loglik(d, ctx.adjusted.lo + 1e-6 * width);
    bool diverges = (peak - near) > 1e3;
    ok = ok && diverges;
    detail += fmt("generic-X drop %.0f; ", peak - near);
  }
  // (ii) intercept + row-stochastic irreducible W: flat across lambda = 1.
  {
    Instance ins = random_instance(50, 2, 0.4, 32);
    SarData d(ins.y, ins.X, ins.W);
    double a = adjusted_loglik(d, 1.0 - 1e-3);
    double b = adjusted_loglik(d, 1.0 + 1e-3);
    bool flat = std::isfinite(a) && std::isfinite(b) && std::abs(a - b) < 0.1;
    ok = ok && flat;
    detail += fmt("row-stochastic jump %.3g; ", std::abs(a - b));
  }
  // (iii) symmetric W never yields an unbounded-above classification.
  {
    int bad = 0;
    for (int t = 0; t < 20; ++t) {
      WeightsMatrix W = (t % 2 == 0)
                            ? normalize(erdos_renyi(30, 0.25, 60 + t),
                                        Normalization::spectral)
                            : group_interaction(5, 6);
      Rng rng(60 + t, 1);
      Eigen::MatrixXd X(W.n(), 2);
      X.col(0).setOnes();
      for (int i = 0; i < W.n(); ++i) X(i, 1) = rng.normal();
      try {
        ParamSpace s = adjusted_space(W.entries, X);
        if (s.lo_class == EndpointClass::unbounded_above ||
            s.hi_class == EndpointClass::unbounded_above)
          ++bad;
      } catch (const std::exception&) {
        ++bad;
      }
    }
    ok = ok && bad == 0;
    detail += fmt("symmetric suite unbounded-above count %d/20", bad);
  }
  return {ok, detail};
}

std::pair<bool, std::string> aml_equals_lll() {
  double worst_grid = 0.0, worst_est = 0.0;
  for (int t = 0; t < 50; ++t) {
    const int R = 3 + t % 3, m = 6 + t % 5;
    std::vector<Eigen::MatrixXd> wb;
    std::vector<Eigen::MatrixXd> xb;
    for (int r = 0; r < R; ++r) {
      wb.push_back(
          normalize(watts_strogatz(m, 2, 0.3, 7000 + 10 * t + r),
                    Normalization::row)
              .entries);
      xb.emplace_back(m, 0);
    }
    Rng rng(7000 + t, 99);
    int n = R * m;
    Eigen::VectorXd alpha(R), rhs(n);
    for (int r = 0; r < R; ++r) alpha(r) = rng.normal();
    for (int r = 0; r < R; ++r)
      for (int i = 0; i < m; ++i) rhs(r * m + i) = alpha(r) + rng.normal();
    std::vector<WeightsMatrix> wrapped;
    for (auto& b : wb) wrapped.push_back({b, Normalization::row, {}});
    WeightsMatrix W = block_diag(wrapped);
    Eigen::MatrixXd S = Eigen::MatrixXd::Identity(n, n) - 0.35 * W.entries;
    Eigen::VectorXd y = S.partialPivLu().solve(rhs);
    NetworkPanel panel = make_network_panel(wb, xb, y);
    LllSystem sys = lll_transform(panel);
    SarData d(y, panel.X, panel.W);
    // Offset must be constant on a grid interior to both spaces.
    double ref = 0.0, mn = 0.0, mx = 0.0;
    for (int g = 0; g < 200; ++g) {
      double lam = -0.9 + 1.8 * g / 199.0;
      double diff = adjusted_loglik_full(d, 1.3, lam) -
                    lll_loglik(sys, 1.3, lam);
      if (g == 0) {
        ref = diff;
        mn = mx = 0.0;
      } else {
        mn = std::min(mn, diff - ref);
        mx = std::max(mx, diff - ref);
      }
    }
    worst_grid = std::max(worst_grid, mx - mn);
    double la = adjusted_qmle(d).lambda_hat;
    double ll = lll_estimator(sys).lambda_hat;
    worst_est = std::max(worst_est, std::abs(la - ll));
  }
  return {worst_grid < 1e-8 && worst_est < 1e-8,
          fmt("max grid spread %.2e, max estimator gap %.2e", worst_grid,
              worst_est)};
}

double reduced_loglik(const Eigen::MatrixXd& D, const Eigen::VectorXd& y,
                      const Eigen::MatrixXd& W, double sigma2, double lam) {
  int n = static_cast<int>(W.rows());
  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n, n) - lam * W;
  Eigen::MatrixXd Sig = (A.transpose() * A).ldlt().solve(
      Eigen::MatrixXd::Identity(n, n));
  Eigen::MatrixXd V = sigma2 * D * Sig * D.transpose();
  Eigen::LLT<Eigen::MatrixXd> llt(V);
  double logdet = 0.0;
  for (Eigen::Index i = 0; i < V.rows(); ++i)
    logdet += 2.0 * std::log(llt.matrixL()(i, i));
  Eigen::VectorXd z = D * y;
  return -0.5 * logdet - 0.5 * z.dot(llt.solve(z));
}

std::pair<bool, std::string> reml_equivalence() {
  double worst = 0.0;
  Rng drng(4242, 0);
  for (int t = 0; t < 20; ++t) {
    const int n = 18, k = 3;
    WeightsMatrix W = random_row_w(n, 2, 0.3, 5000 + t);
    Rng rng(5000 + t, 1);
    Eigen::MatrixXd X(n, k);
    X.col(0).setOnes();
    for (int j = 1; j < k; ++j)
      for (int i = 0; i < n; ++i) X(i, j) = rng.normal();
    Eigen::MatrixXd A =
        Eigen::MatrixXd::Identity(n, n) - 0.4 * W.entries;
    Eigen::VectorXd eps(n);
    for (int i = 0; i < n; ++i) eps(i) = rng.normal();
    Eigen::VectorXd y =
        X * Eigen::VectorXd::Ones(k) + A.partialPivLu().solve(eps);
    SemModel m{y, X, W};
    // Two independent bases of the orthocomplement of col(X).
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(X);
    Eigen::MatrixXd Q =
        qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
    Eigen::MatrixXd Qc = Q.rightCols(n - k);
    for (int v = 0; v < 2; ++v) {
      Eigen::MatrixXd T(n - k, n - k);
      for (int i = 0; i < n - k; ++i)
        for (int j = 0; j < n - k; ++j) T(i, j) = drng.normal();
      Eigen::MatrixXd D = T * Qc.transpose();
      double ref = 0.0, mn = 0.0, mx = 0.0;
      for (int g = 0; g < 60; ++g) {
        double lam = -0.7 + 1.5 * g / 59.0;
        double diff = sem_adjusted_loglik(m, 0.8, lam) -
                      reduced_loglik(D, y, W.entries, 0.8, lam);
        if (g == 0) {
          ref = diff;
        } else {
          mn = std::min(mn, diff - ref);
          mx = std::max(mx, diff - ref);
        }
      }
      worst = std::max(worst, mx - mn);
    }
  }
  if (worst >= 1e-8)
    return {false, fmt("max grid spread %.2e (tol 1e-8)", worst)};

  // Information unbiasedness at small n: mean score ~ 0 and var(s_lambda)
  // ~ -E d s_lambda / d lambda, each within 5 mc se.
  const int n = 15, reps = 4000;
  WeightsMatrix W = random_row_w(n, 2, 0.3, 606);
  Rng rng(606, 1);
  Eigen::MatrixXd X(n, 2);
  X.col(0).setOnes();
  for (int i = 0; i < n; ++i) X(i, 1) = rng.normal();
  const double lam0 = 0.3, s20 = 1.0, dh = 1e-5;
  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n, n) - lam0 * W.entries;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
  double m1 = 0, m2 = 0, v2 = 0, md = 0, vd = 0, v1 = 0;
  for (int rep = 0; rep < reps; ++rep) {
    Rng r2(607, rep);
    Eigen::VectorXd eps(n);
    for (int i = 0; i < n; ++i) eps(i) = r2.normal();
    Eigen::VectorXd y = X * Eigen::VectorXd::Ones(2) + lu.solve(eps);
    SemModel m{y, X, W};
    Eigen::Vector2d s = sem_adjusted_score(m, s20, lam0);
    double dlam = (sem_adjusted_score(m, s20, lam0 + dh)(1) -
                   sem_adjusted_score(m, s20, lam0 - dh)(1)) /
                  (2 * dh);
    m1 += s(0);
    v1 += s(0) * s(0);
    m2 += s(1);
    v2 += s(1) * s(1);
    md += dlam;
    vd += dlam * dlam;
  }
  m1 /= reps;
  m2 /= reps;
  md /= reps;
  v1 = v1 / reps - m1 * m1;
  v2 = v2 / reps - m2 * m2;
  vd = vd / reps - md * md;
  double se1 = std::sqrt(v1 / reps), se2 = std::sqrt(v2 / reps);
  // var(s2) - (-E ds2) should be 0; rough se combines both estimates.
  double gap = v2 + md;
  double se_gap = std::sqrt(vd / reps) + 2.0 * v2 / std::sqrt(double(reps));
  bool ok = std::abs(m1) <= 5 * se1 && std::abs(m2) <= 5 * se2 &&
            std::abs(gap) <= 5 * se_gap;
  return {ok, fmt("grid spread %.2e; score means %.3g/%.3g (se %.2g/%.2g), "
                  "info gap %.3g (se %.2g)",
                  worst, m1, m2, se1, se2, gap, se_gap)};
}

std::pair<bool, std::string> saddlepoint_oracle() {
  const int n = 100, k = 2, reps = 100000;
  const double lam0 = 0.5;
  Instance ins = random_instance(n, k, lam0, 2024);
  auto cache = std::make_shared<const EigenCache>(ins.W.entries);
  EstimateContext ctx = make_context(ins.W.entries, ins.X);
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(
      Eigen::MatrixXd::Identity(n, n) - lam0 * ins.W.entries);
  Eigen::VectorXd mean_part = ins.X * Eigen::VectorXd::Ones(k);
  std::vector<double> zs = {0.30, 0.38, 0.44, 0.50, 0.56, 0.62, 0.70};
  std::vector<long> count_le(zs.size(), 0), count_q(zs.size(), 0),
      count_both(zs.size(), 0);
  SarData d0(ins.y, ins.X, ins.W, cache);  // geometry carrier for the cgf
  for (int rep = 0; rep < reps; ++rep) {
    Rng rng(2025, rep);
    Eigen::VectorXd rhs = mean_part;
    for (int i = 0; i < n; ++i) rhs(i) += rng.normal();
    SarData d(lu.solve(rhs), ins.X, ins.W, cache);
    double lam_hat = adjusted_qmle(d, ctx).lambda_hat;
    for (size_t j = 0; j < zs.size(); ++j) {
      bool le = lam_hat <= zs[j];
      bool q_neg = estimating_fn(d, zs[j]) <= 0.0;
      if (le) ++count_le[j];
      if (q_neg) ++count_q[j];
      if (le && q_neg) ++count_both[j];
    }
  }
  double worst_lr = 0.0, worst_rep = 0.0;
  for (size_t j = 0; j < zs.size(); ++j) {
    QformSpec spec = build_qform(d0, zs[j], lam0,
                                 Eigen::VectorXd::Ones(k), 1.0);
    double lr = lr_cdf_at_zero(spec).prob;
    double emp = double(count_le[j]) / reps;
    double empq = double(count_q[j]) / reps;
    worst_lr = std::max(worst_lr, std::abs(lr - emp));
    // Binomial se of the difference between the two empirical cdfs.
    double pdiff = (count_le[j] + count_q[j] - 2.0 * count_both[j]) / reps;
    double se = std::sqrt(std::max(pdiff, 1e-12) / reps) + 1e-9;
    worst_rep = std::max(worst_rep, std::abs(emp - empq) / (3.0 * se + 1e-9));
  }
  bool ok = worst_lr < 0.005 && worst_rep <= 1.0;
  return {ok, fmt("max |lr - empirical| %.4f (tol 0.005); cdf-rep max "
                  "%.2f x (3 se)",
                  worst_lr, worst_rep)};
}

std::pair<bool, std::string> brute_force_oracle() {
  const int G = 100000;
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    Instance ins = random_instance(40, 3, 0.4, 3000 + t);
    SarData d(ins.y, ins.X, ins.W);
    EstimateContext ctx = make_context(ins.W.entries, ins.X);
    auto argmax = [&](const ParamSpace& s, auto&& f) {
      double pad = 1e-8 * (s.hi - s.lo);
      double lo = s.lo + pad, hi = s.hi - pad;
      double best = lo, bestv = -1e300;
      for (int i = 0; i < G; ++i) {
        double lam = lo + (hi - lo) * i / (G - 1.0);
        double v = f(lam);
        if (v > bestv) {
          bestv = v;
          best = lam;
        }
      }
      return best;
    };
    double step_a = (ctx.adjusted.hi - ctx.adjusted.lo) / (G - 1.0);
    double step_m = (ctx.lambda.hi - ctx.lambda.lo) / (G - 1.0);
    double ga = argmax(ctx.adjusted,
                       [&](double l) { return adjusted_loglik(d, l); });
    double gm =
        argmax(ctx.lambda, [&](double l) { return profile_loglik(d, l); });
    double ea = adjusted_qmle(d, ctx).lambda_hat;
    double em = qmle(d, ctx).lambda_hat;
    worst = std::max(worst, std::abs(ea - ga) / step_a);
    worst = std::max(worst, std::abs(em - gm) / step_m);
  }
  return {worst <= 1.0,
          fmt("max |root - grid argmax| = %.3f grid steps", worst)};
}

std::pair<bool, std::string> crosstab_cell() {
  ExperimentConfig cfg;
  cfg.p = 0.2;
  cfg.h = 50;
  cfg.k_tilde = 1;
  cfg.x_design = XDesign::plain;
  cfg.lambda = 0.5;
  cfg.reps = 10000;
  cfg.seed = 56;  // graph realization with w2inv matching the published 2.34
  cfg.methods = {Method::uqmle, Method::aqmle};
  SummaryRow r = run_bias_experiment(cfg);
  bool ok = std::abs(r.pct_u_gt1 - 14.76) <= 1.5 &&
            std::abs(r.pct_ua - 91.34) <= 3.0;
  return {ok, fmt("P(u>1) %.2f vs 14.76 (+-1.5); P(u>1|a>1) %.2f vs "
                  "91.34 (+-3)",
                  r.pct_u_gt1, r.pct_ua)};
}

}  // namespace

int main() {
  run(1, "published bias table cells", table1_cells);
  run(2, "frozen illustration fixture", figure_fixture);
  run(3, "published coverage cells", table4_cell);
  run(4, "unbiased estimating equation", unbiased_estimating_eq);
  run(5, "degrees-of-freedom identity", df_identity);
  run(6, "score vs finite differences", gradient_checks);
  run(7, "boundary trichotomy", trichotomy);
  run(8, "adjusted = transformation on pure panels", aml_equals_lll);
  run(9, "REML equivalence and information unbiasedness", reml_equivalence);
  run(10, "saddlepoint cdf oracle", saddlepoint_oracle);
  run(11, "brute-force argmax oracle", brute_force_oracle);
  run(12, "exceedance cross-tab cell", crosstab_cell);
  std::printf("%d of 12 criteria passed\n", 12 - g_failures);
  return g_failures;
}
