#include "sar/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "sar/optim.hpp"

namespace sar {

namespace {

constexpr int kGrid = 512;
constexpr double kPad = 1e-8;  // endpoint padding, relative to width

void fill_estimates(const SarData& data, EstimateResult& r, bool adjusted_df) {
  r.beta = beta_hat(data, r.lambda_hat);
  r.sigma2_hat = adjusted_df ? sigma2_aml(data, r.lambda_hat)
                             : sigma2_ml(data, r.lambda_hat);
}

EstimateContext context_for(const SarData& data,
                            const std::optional<EstimateContext>& ctx) {
  if (ctx) return *ctx;
  return make_context(data.W().entries, data.X());
}

// Noiseless data make the residual quadratic form vanish at the generating
// lambda, where every objective peaks at +inf; identify that point directly
// as the parabola minimum of the quadratic form.
bool noiseless_shortcut(const SarData& data, EstimateResult& r) {
  if (data.qf_a() <= 0.0) return false;
  double lam = data.qf_b() / data.qf_a();
  double qf = data.qf_c() - data.qf_b() * data.qf_b() / data.qf_a();
  if (qf >= 1e-14 * data.y().squaredNorm()) return false;
  r.lambda_hat = lam;
  r.beta = beta_hat(data, lam);
  r.sigma2_hat = 0.0;
  return true;
}

// Grid argmax + local refinement of f on [lo, hi] (already padded). On near
// ties (within tie_tol) prefers the peak closest to zero.
double grid_refine_max(const std::function<double(double)>& f, double lo,
                       double hi, bool* tie_flag = nullptr) {
  std::vector<double> xs(kGrid), fs(kGrid);
  for (int i = 0; i < kGrid; ++i) {
    xs[i] = lo + (hi - lo) * i / (kGrid - 1.0);
    fs[i] = f(xs[i]);
  }
  // Collect local maxima (interior sign change of the slope plus endpoints).
  std::vector<int> peaks;
  for (int i = 0; i < kGrid; ++i) {
    bool up = (i == 0) || fs[i] >= fs[i - 1];
    bool down = (i == kGrid - 1) || fs[i] >= fs[i + 1];
    if (up && down) peaks.push_back(i);
  }
  double best_x = xs[0], best_f = -std::numeric_limits<double>::infinity();
  int interior_peaks = 0;
  for (int i : peaks) {
    double a = xs[std::max(0, i - 1)], b = xs[std::min(kGrid - 1, i + 1)];
    double x = brent_max(f, a, b, 1e-9);
    double v = f(x);
    if (i > 0 && i < kGrid - 1) ++interior_peaks;
    if (v > best_f + 1e-10 ||
        (std::abs(v - best_f) <= 1e-10 && std::abs(x) < std::abs(best_x))) {
      best_f = v;
      best_x = x;
    }
  }
  if (tie_flag) *tie_flag = interior_peaks > 1;
  return best_x;
}

}  // namespace

EstimateContext make_context(const Eigen::MatrixXd& W,
                             const Eigen::MatrixXd& X) {
  EstimateContext ctx;
  auto evs = real_eigen_structure(W);  // shared by all the checks below
  ctx.lambda = lambda_space(evs);
  ctx.adjusted = adjusted_space(W, X, evs);
  ctx.c1_holds = check_C1(W, X, ctx.adjusted).holds;
  for (const auto& ev : evs)
    if (std::abs(ev.value) > 1e-12)
      ctx.real_reciprocals.push_back(1.0 / ev.value);
  std::sort(ctx.real_reciprocals.begin(), ctx.real_reciprocals.end());
  return ctx;
}

EstimateResult qmle(const SarData& data,
                    const std::optional<EstimateContext>& ctx) {
  // make_context already ran the identification check for a supplied ctx.
  if (!ctx)
    if (auto bad = check_assumption1(data.W().entries, data.X()))
      throw std::runtime_error(
          "qmle: objective unbounded, identification fails at omega = " +
          std::to_string(*bad));
  EstimateResult r;
  r.method = Method::qmle;
  r.space_used = ctx ? ctx->lambda : lambda_space(data.W().entries);
  if (noiseless_shortcut(data, r)) return r;
  double pad = kPad * (r.space_used.hi - r.space_used.lo);
  double lo = r.space_used.lo + pad, hi = r.space_used.hi - pad;
  auto f = [&](double lam) { return profile_loglik(data, lam); };
  r.lambda_hat = grid_refine_max(f, lo, hi);
  // Polish interior maxima with the profile score; the maximizer refinement
  // alone is only sqrt(eps)-accurate in lambda.
  auto score = [&](double lam) {
    return data.n() * (data.qf_b() - lam * data.qf_a()) / data.resid_qf(lam) -
           data.trace_G(lam);
  };
  double step = (hi - lo) / (kGrid - 1.0);
  double a = std::max(lo, r.lambda_hat - step),
         b = std::min(hi, r.lambda_hat + step);
  if (score(a) > 0.0 && score(b) < 0.0)
    r.lambda_hat = brent_root(score, a, b, 1e-12);
  r.boundary = (hi - r.lambda_hat < 2 * pad) || (r.lambda_hat - lo < 2 * pad);
  fill_estimates(data, r, /*adjusted_df=*/false);
  return r;
}

EstimateResult adjusted_qmle(const SarData& data,
                             const std::optional<EstimateContext>& ctx) {
  EstimateContext c = context_for(data, ctx);
  if (c.adjusted.lo_class == EndpointClass::unbounded_above ||
      c.adjusted.hi_class == EndpointClass::unbounded_above)
    throw std::runtime_error(
        "adjusted_qmle: objective unbounded above at a parameter-space "
        "endpoint");
  EstimateResult r;
  r.method = Method::aqmle;
  r.space_used = c.adjusted;
  if (noiseless_shortcut(data, r)) {
    r.outside_Lambda = !c.lambda.contains(r.lambda_hat);
    return r;
  }
  double pad = kPad * (c.adjusted.hi - c.adjusted.lo);
  double lo = c.adjusted.lo + pad, hi = c.adjusted.hi - pad;

  bool solved = false;
  if (c.c1_holds) {
    // Single peak: the adjusted score crosses zero downward exactly once.
    double prev_x = lo, prev_s = adjusted_score(data, lo);
    for (int i = 1; i < kGrid; ++i) {
      double x = lo + (hi - lo) * i / (kGrid - 1.0);
      double s = adjusted_score(data, x);
      if (prev_s > 0.0 && s <= 0.0) {
        r.lambda_hat = brent_root(
            [&](double lam) { return adjusted_score(data, lam); }, prev_x, x,
            1e-10);
        solved = true;
        break;
      }
      prev_x = x;
      prev_s = s;
    }
    if (!solved) {
      // Monotone score on the padded grid: maximum sits at an endpoint.
      r.lambda_hat = (prev_s > 0.0) ? hi : lo;
      r.boundary = true;
      solved = true;
    }
  }
  if (!c.c1_holds) {
    auto f = [&](double lam) { return adjusted_loglik(data, lam); };
    r.lambda_hat = grid_refine_max(f, lo, hi, &r.multi_peak_detected);
  }
  r.outside_Lambda = !c.lambda.contains(r.lambda_hat);
  fill_estimates(data, r, /*adjusted_df=*/true);
  return r;
}

EstimateResult censored_adjusted_qmle(const SarData& data,
                                      const std::optional<EstimateContext>& ctx) {
  EstimateContext c = context_for(data, ctx);
  EstimateResult r = adjusted_qmle(data, c);
  r.method = Method::aqmle_censored;
  // Clamp to the closure of the baseline space; an endpoint belongs to the
  // search set only where the adjusted objective stays bounded (i.e. the
  // endpoint is interior to the enlarged space).
  auto clamp_to = [&](double endpoint, bool bounded_there, double pad_dir) {
    r.censored = true;
    r.lambda_hat =
        bounded_there
            ? endpoint
            : endpoint + pad_dir * kPad * (c.lambda.hi - c.lambda.lo);
    fill_estimates(data, r, /*adjusted_df=*/true);
  };
  if (r.lambda_hat > c.lambda.hi)
    clamp_to(c.lambda.hi, c.adjusted.hi > c.lambda.hi, -1.0);
  else if (r.lambda_hat < c.lambda.lo)
    clamp_to(c.lambda.lo, c.adjusted.lo < c.lambda.lo, 1.0);
  return r;
}

EstimateResult unrestricted_qmle(const SarData& data,
                                 const std::optional<EstimateContext>& ctx) {
  if (!ctx)
    if (auto bad = check_assumption1(data.W().entries, data.X()))
      throw std::runtime_error(
          "unrestricted_qmle: objective unbounded, identification fails at "
          "omega = " +
          std::to_string(*bad));
  EstimateContext c = context_for(data, ctx);
  EstimateResult r;
  r.method = Method::uqmle;
  if (noiseless_shortcut(data, r)) {
    r.outside_Lambda = !c.lambda.contains(r.lambda_hat);
    return r;
  }
  // Bounded engineering window around the baseline space.
  double wlo = 3.0 * c.lambda.lo, whi = 3.0 * c.lambda.hi;
  std::vector<double> cuts{wlo};
  for (double b : c.real_reciprocals)
    if (b > wlo && b < whi) cuts.push_back(b);
  cuts.push_back(whi);

  auto f = [&](double lam) { return profile_loglik(data, lam); };
  double best_x = 0.0, best_f = -std::numeric_limits<double>::infinity();
  const int sub = 64;
  for (std::size_t t = 0; t + 1 < cuts.size(); ++t) {
    double len = cuts[t + 1] - cuts[t];
    if (len < 1e-12) continue;
    double lo = cuts[t] + kPad * len, hi = cuts[t + 1] - kPad * len;
    int bi = 0;
    double bv = -std::numeric_limits<double>::infinity();
    std::vector<double> xs(sub), fs(sub);
    for (int i = 0; i < sub; ++i) {
      xs[i] = lo + (hi - lo) * i / (sub - 1.0);
      fs[i] = f(xs[i]);
      if (fs[i] > bv) {
        bv = fs[i];
        bi = i;
      }
    }
    double a = xs[std::max(0, bi - 1)], b = xs[std::min(sub - 1, bi + 1)];
    double x = brent_max(f, a, b, 1e-9);
    double v = f(x);
    if (v > best_f + 1e-10 ||
        (std::abs(v - best_f) <= 1e-10 && std::abs(x) < std::abs(best_x))) {
      best_f = v;
      best_x = x;
    }
  }
  r.lambda_hat = best_x;
  r.space_used.lo = wlo;
  r.space_used.hi = whi;
  r.space_used.interior_singularities.assign(cuts.begin() + 1, cuts.end() - 1);
  r.outside_Lambda = !c.lambda.contains(best_x);
  fill_estimates(data, r, /*adjusted_df=*/false);
  return r;
}

}  // namespace sar
