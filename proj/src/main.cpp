/* Command-line front end.
 *
 * Subcommands: gen-weights, diagnose, estimate, ci, simulate,
 * replicate-table. Exit codes: 0 success, 1 usage error, 2 numeric or
 * diagnostic failure (identification violation, singular systems, ...).
 * Every subcommand is deterministic given --seed.
 */
#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <string>

#include "sar/estimate.hpp"
#include "sar/infer.hpp"
#include "sar/io.hpp"
#include "sar/mc.hpp"
#include "sar/model.hpp"
#include "sar/panels.hpp"
#include "sar/spectral.hpp"
#include "sar/weights.hpp"

using json = nlohmann::ordered_json;

namespace {

// A y/X file may be a bare numeric CSV or one with a header row.
Eigen::MatrixXd read_data_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path);
  std::string first;
  std::getline(in, first);
  char* end = nullptr;
  std::strtod(first.c_str(), &end);
  bool headered = (end == first.c_str());  // first field is not a number
  return headered ? sar::read_csv_table(path).values
                  : sar::read_csv_matrix(path);
}

void emit(const json& j, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << j.dump(2) << "\n";
  } else {
    std::ofstream out(out_path);
    if (!out) throw std::invalid_argument("cannot write " + out_path);
    out << j.dump(2) << "\n";
  }
}

void emit_text(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(out_path);
    if (!out) throw std::invalid_argument("cannot write " + out_path);
    out << text;
  }
}

const char* endpoint_name(sar::EndpointClass c) {
  switch (c) {
    case sar::EndpointClass::divergent: return "divergent";
    case sar::EndpointClass::removable: return "removable";
    case sar::EndpointClass::unbounded_above: return "unbounded_above";
  }
  return "?";
}

json space_json(const sar::ParamSpace& s) {
  return json{{"lo", s.lo},
              {"hi", s.hi},
              {"lo_class", endpoint_name(s.lo_class)},
              {"hi_class", endpoint_name(s.hi_class)},
              {"interior_singularities", s.interior_singularities}};
}

const char* method_name(sar::Method m) {
  switch (m) {
    case sar::Method::qmle: return "qmle";
    case sar::Method::aqmle: return "aqmle";
    case sar::Method::aqmle_censored: return "censored";
    case sar::Method::uqmle: return "uqmle";
    case sar::Method::lll: return "lll";
  }
  return "?";
}

json result_json(const sar::EstimateResult& r) {
  std::vector<double> beta(r.beta.data(), r.beta.data() + r.beta.size());
  return json{{"method", method_name(r.method)},
              {"lambda_hat", r.lambda_hat},
              {"beta", beta},
              {"sigma2_hat", r.sigma2_hat},
              {"space_used", space_json(r.space_used)},
              {"outside_baseline_space", r.outside_Lambda},
              {"censored", r.censored},
              {"multi_peak_detected", r.multi_peak_detected},
              {"boundary", r.boundary}};
}

// ---------------------------------------------------------------------------

struct GenWeightsArgs {
  std::string kind = "ws";
  int n = 200, h = 5, R = 10, m = 20;
  double p = 0.2;
  std::uint64_t seed = 1;
  std::string normalization = "row";
  bool connected = false;
  std::string out;
};

int run_gen_weights(const GenWeightsArgs& a) {
  sar::Normalization norm = sar::Normalization::none;
  if (a.normalization == "row") norm = sar::Normalization::row;
  else if (a.normalization == "spectral") norm = sar::Normalization::spectral;
  else if (a.normalization != "none")
    throw std::invalid_argument("unknown normalization " + a.normalization);

  sar::WeightsMatrix W;
  if (a.kind == "group") {
    W = sar::group_interaction(a.R, a.m);
  } else {
    sar::AdjacencyMatrix adj;
    std::uint64_t seed = a.seed;
    for (int attempt = 0;; ++attempt) {
      if (a.kind == "circulant") adj = sar::circulant_ahead_behind(a.n, a.h);
      else if (a.kind == "ws") adj = sar::watts_strogatz(a.n, a.h, a.p, seed);
      else if (a.kind == "er") adj = sar::erdos_renyi(a.n, a.p, seed);
      else throw std::invalid_argument("unknown weights kind " + a.kind);
      if (!a.connected || sar::is_irreducible(adj)) break;
      if (attempt >= 10000)
        throw std::runtime_error("no connected graph found in 10000 draws");
      ++seed;
    }
    W = sar::normalize(adj, norm);
  }
  if (a.out.empty()) throw std::invalid_argument("gen-weights needs --out");
  if (a.out.size() > 4 && a.out.substr(a.out.size() - 4) == ".mtx")
    sar::write_matrix_market(a.out, W.entries);
  else
    sar::write_csv_matrix(a.out, W.entries);
  return 0;
}

// ---------------------------------------------------------------------------

struct DiagnoseArgs {
  std::string w_path, x_path, out;
};

int run_diagnose(const DiagnoseArgs& a) {
  Eigen::MatrixXd W = sar::read_matrix_auto(a.w_path);
  Eigen::MatrixXd X;
  if (a.x_path.empty())
    X = Eigen::MatrixXd::Ones(W.rows(), 1);
  else
    X = read_data_matrix(a.x_path);

  json j;
  j["n"] = W.rows();
  j["k"] = X.cols();
  j["irreducible"] = sar::is_irreducible(W);
  j["spectral_radius"] = sar::spectral_radius(W);
  auto evs = sar::real_eigen_structure(W);
  j["distinct_real_eigenvalues"] = evs.size();
  j["baseline_space"] = space_json(sar::lambda_space(evs));
  if (auto bad = sar::check_assumption1(W, X, evs)) {
    j["identification"] = "violated";
    j["violated_at_omega"] = *bad;
    emit(j, a.out);
    std::cerr << "identification assumption violated at omega = " << *bad
              << ": col(omega I - W) lies inside col(X)\n";
    return 2;
  }
  j["identification"] = "ok";
  auto adj = sar::adjusted_space(W, X, evs);
  j["adjusted_space"] = space_json(adj);
  j["single_peak_condition"] = sar::check_C1(W, X, adj).holds;
  emit(j, a.out);
  return 0;
}

// ---------------------------------------------------------------------------

struct EstimateArgs {
  std::string y_path, x_path, w_path;
  std::string method = "aqmle";
  std::string report = "json";
  std::string out;
};

sar::SarData load_data(const std::string& y_path, const std::string& x_path,
                       const std::string& w_path) {
  Eigen::MatrixXd ym = read_data_matrix(y_path);
  if (ym.cols() != 1)
    throw std::invalid_argument("y must be a single column");
  Eigen::MatrixXd X = read_data_matrix(x_path);
  Eigen::MatrixXd Wm = sar::read_matrix_auto(w_path);
  sar::WeightsMatrix W{Wm, sar::Normalization::none, {}};
  return sar::SarData(ym.col(0), X, W);
}

int run_estimate(const EstimateArgs& a) {
  sar::SarData d = load_data(a.y_path, a.x_path, a.w_path);
  sar::EstimateResult r;
  if (a.method == "qmle") r = sar::qmle(d);
  else if (a.method == "aqmle") r = sar::adjusted_qmle(d);
  else if (a.method == "censored") r = sar::censored_adjusted_qmle(d);
  else if (a.method == "uqmle") r = sar::unrestricted_qmle(d);
  else throw std::invalid_argument("unknown method " + a.method);

  if (a.report == "json") {
    emit(result_json(r), a.out);
  } else if (a.report == "csv") {
    std::string csv = "method,lambda_hat,sigma2_hat";
    for (int i = 0; i < r.beta.size(); ++i)
      csv += ",beta" + std::to_string(i);
    csv += "\n";
    char buf[64];
    csv += method_name(r.method);
    std::snprintf(buf, sizeof buf, ",%.17g,%.17g", r.lambda_hat,
                  r.sigma2_hat);
    csv += buf;
    for (int i = 0; i < r.beta.size(); ++i) {
      std::snprintf(buf, sizeof buf, ",%.17g", r.beta(i));
      csv += buf;
    }
    csv += "\n";
    emit_text(csv, a.out);
  } else {
    throw std::invalid_argument("unknown report format " + a.report);
  }
  return 0;
}

// ---------------------------------------------------------------------------

struct CiArgs {
  std::string y_path, x_path, w_path;
  double level = 0.95;
  std::string side = "two";
  std::string method = "saddlepoint";
  std::string out;
};

json cdf_diag(const sar::SarData& d, double z, double lambda) {
  sar::QformSpec spec = sar::build_qform(d, z, lambda,
                                         sar::beta_hat(d, lambda),
                                         sar::sigma2_aml(d, lambda));
  sar::CdfApprox c = sar::lr_cdf_at_zero(spec);
  return json{{"lambda", lambda},
              {"prob", c.prob},
              {"s_hat", c.s_hat},
              {"w_hat", c.w_hat},
              {"u_hat", c.u_hat},
              {"branch", c.branch == sar::CdfBranch::mean_point
                             ? "mean_point"
                             : "general"},
              {"clamped", c.clamped}};
}

int run_ci(const CiArgs& a) {
  if (a.side != "two" && a.side != "right")
    throw std::invalid_argument("side must be two or right");
  bool right = a.side == "right";
  sar::SarData d = load_data(a.y_path, a.x_path, a.w_path);
  sar::EstimateResult r = sar::adjusted_qmle(d);
  json j;
  j["lambda_hat"] = r.lambda_hat;
  j["level"] = a.level;
  j["side"] = a.side;
  j["method"] = a.method;
  sar::Interval iv;
  if (a.method == "saddlepoint") {
    double alpha = 1.0 - a.level;
    double a1 = right ? 0.0 : 0.5 * alpha;
    double a2 = right ? alpha : 0.5 * alpha;
    iv = sar::saddlepoint_ci(d, r.lambda_hat, a1, a2);
    json diag = json::array();
    if (!iv.lo_unbounded) diag.push_back(cdf_diag(d, r.lambda_hat, iv.lo));
    if (!iv.hi_unbounded) diag.push_back(cdf_diag(d, r.lambda_hat, iv.hi));
    j["endpoint_diagnostics"] = diag;
  } else if (a.method == "wald") {
    iv = sar::wald_ci(d, r, a.level, right);
    j["wald_variance"] = sar::wald_variance_aml(d, r.lambda_hat, r.beta,
                                                r.sigma2_hat);
  } else {
    throw std::invalid_argument("unknown ci method " + a.method);
  }
  j["interval"] = json{{"lo", iv.lo},
                       {"hi", iv.hi},
                       {"lo_unbounded", iv.lo_unbounded},
                       {"hi_unbounded", iv.hi_unbounded},
                       {"lo_at_edge", iv.lo_at_edge},
                       {"hi_at_edge", iv.hi_at_edge}};
  emit(j, a.out);
  return 0;
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
  std::string config_path;
  std::string design = "single";
  int n = 200, R = 10, m = 20, h = 5, k_tilde = 2, reps = 1000;
  double p = 0.0, lambda = 0.5, sigma = 1.0, level = 0.95;
  std::string normalization = "row", errors = "normal";
  std::uint64_t seed = 1;
  std::string mode = "bias";  // bias | coverage
  std::vector<std::string> methods;
  std::string out;
};

sar::ExperimentConfig build_config(const SimulateArgs& a) {
  sar::ExperimentConfig c;
  auto apply = [&c](const json& j) {
    if (j.contains("design"))
      c.design = j["design"] == "network"
                     ? sar::DesignKind::network_fe
                     : sar::DesignKind::single_network;
    if (j.contains("n")) c.n = j["n"];
    if (j.contains("R")) c.R = j["R"];
    if (j.contains("m")) c.m = j["m"];
    if (j.contains("h")) c.h = j["h"];
    if (j.contains("p")) c.p = j["p"];
    if (j.contains("k_tilde")) c.k_tilde = j["k_tilde"];
    if (j.contains("lambda")) c.lambda = j["lambda"];
    if (j.contains("sigma")) c.sigma = j["sigma"];
    if (j.contains("reps")) c.reps = j["reps"];
    if (j.contains("seed")) c.seed = j["seed"];
    if (j.contains("level")) c.level = j["level"];
    if (j.contains("normalization"))
      c.normalization = j["normalization"] == "spectral"
                            ? sar::Normalization::spectral
                            : sar::Normalization::row;
    if (j.contains("errors"))
      c.errors = sar::parse_error_dist(j["errors"].get<std::string>());
  };
  json j;
  if (!a.config_path.empty()) {
    std::ifstream in(a.config_path);
    if (!in) throw std::invalid_argument("cannot open " + a.config_path);
    in >> j;
  } else {
    j = json{{"design", a.design == "network" ? "network" : "single"},
             {"n", a.n},     {"R", a.R},
             {"m", a.m},     {"h", a.h},
             {"p", a.p},     {"k_tilde", a.k_tilde},
             {"lambda", a.lambda}, {"sigma", a.sigma},
             {"reps", a.reps},     {"seed", a.seed},
             {"level", a.level},   {"normalization", a.normalization},
             {"errors", a.errors}};
  }
  apply(j);
  for (const auto& ms : a.methods) {
    if (ms == "qmle") c.methods.push_back(sar::Method::qmle);
    else if (ms == "aqmle") c.methods.push_back(sar::Method::aqmle);
    else if (ms == "censored")
      c.methods.push_back(sar::Method::aqmle_censored);
    else if (ms == "uqmle") c.methods.push_back(sar::Method::uqmle);
    else if (ms == "lll") c.methods.push_back(sar::Method::lll);
    else throw std::invalid_argument("unknown method " + ms);
  }
  return c;
}

int run_simulate(const SimulateArgs& a) {
  sar::ExperimentConfig cfg = build_config(a);
  json j;
  if (a.mode == "bias") {
    sar::SummaryRow r = sar::run_bias_experiment(cfg);
    json est = json::array();
    for (const auto& s : r.estimators)
      est.push_back(json{{"method", method_name(s.method)},
                         {"reps_used", s.reps_used},
                         {"failed", s.failed},
                         {"bias", s.bias},
                         {"sd", s.sd},
                         {"rmse", s.rmse},
                         {"mc_se", s.mc_se},
                         {"frac_gt1", s.frac_gt1}});
    j["estimators"] = est;
    j["omega2_recip"] = r.omega2_recip;
  } else if (a.mode == "coverage") {
    sar::SummaryRow r = sar::run_coverage_experiment(cfg);
    json cov = json::array();
    for (const auto& c : r.coverage)
      cov.push_back(json{{"name", c.name},
                         {"reps_used", c.reps_used},
                         {"failed", c.failed},
                         {"two_sided", c.two_sided},
                         {"right_sided", c.right_sided}});
    j["coverage"] = cov;
    j["omega2_recip"] = r.omega2_recip;
  } else {
    throw std::invalid_argument("mode must be bias or coverage");
  }
  emit(j, a.out);
  return 0;
}

// ---------------------------------------------------------------------------

struct ReplicateArgs {
  std::string table = "1";
  int scale = 1000;
  std::uint64_t seed = 1;
  std::string out;
};

int run_replicate(const ReplicateArgs& a) {
  emit_text(sar::replicate_table(a.table, a.scale, a.seed), a.out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spatial autoregression: adjusted QMLE estimation, "
               "saddlepoint inference, and simulation studies"};
  app.require_subcommand(1);
  // --h is a model parameter below, so help is long-form only.
  app.set_help_flag("--help", "print help");

  int threads = 0;
  app.add_option("--threads", threads,
                 "worker thread cap (0 = library default)");

  GenWeightsArgs gw;
  auto* c_gw = app.add_subcommand("gen-weights", "generate a weights matrix");
  c_gw->set_help_flag("--help", "print help");
  c_gw->add_option("--kind", gw.kind, "circulant|ws|er|group");
  c_gw->add_option("--n", gw.n);
  c_gw->add_option("--h", gw.h);
  c_gw->add_option("--p", gw.p);
  c_gw->add_option("--R", gw.R);
  c_gw->add_option("--m", gw.m);
  c_gw->add_option("--seed", gw.seed);
  c_gw->add_option("--normalize", gw.normalization, "none|row|spectral");
  c_gw->add_flag("--connected", gw.connected,
                 "resample until strongly connected");
  c_gw->add_option("--out", gw.out, ".mtx or .csv path")->required();

  DiagnoseArgs dg;
  auto* c_dg = app.add_subcommand(
      "diagnose", "parameter spaces and identification checks");
  c_dg->add_option("--w", dg.w_path)->required();
  c_dg->add_option("--x", dg.x_path, "defaults to an intercept column");
  c_dg->add_option("--out", dg.out);

  EstimateArgs es;
  auto* c_es = app.add_subcommand("estimate", "estimate lambda");
  c_es->add_option("--y", es.y_path)->required();
  c_es->add_option("--x", es.x_path)->required();
  c_es->add_option("--w", es.w_path)->required();
  c_es->add_option("--method", es.method, "qmle|aqmle|censored|uqmle");
  c_es->add_option("--report", es.report, "json|csv");
  c_es->add_option("--out", es.out);

  CiArgs ci;
  auto* c_ci = app.add_subcommand("ci", "confidence interval for lambda");
  c_ci->add_option("--y", ci.y_path)->required();
  c_ci->add_option("--x", ci.x_path)->required();
  c_ci->add_option("--w", ci.w_path)->required();
  c_ci->add_option("--level", ci.level);
  c_ci->add_option("--side", ci.side, "two|right");
  c_ci->add_option("--method", ci.method, "saddlepoint|wald");
  c_ci->add_option("--out", ci.out);

  SimulateArgs sim;
  auto* c_sim = app.add_subcommand("simulate", "Monte Carlo experiment");
  c_sim->set_help_flag("--help", "print help");
  c_sim->add_option("--config", sim.config_path, "JSON config file");
  c_sim->add_option("--design", sim.design, "single|network");
  c_sim->add_option("--mode", sim.mode, "bias|coverage");
  c_sim->add_option("--n", sim.n);
  c_sim->add_option("--R", sim.R);
  c_sim->add_option("--m", sim.m);
  c_sim->add_option("--h", sim.h);
  c_sim->add_option("--p", sim.p);
  c_sim->add_option("--k-tilde", sim.k_tilde);
  c_sim->add_option("--lambda", sim.lambda);
  c_sim->add_option("--sigma", sim.sigma);
  c_sim->add_option("--level", sim.level);
  c_sim->add_option("--normalize", sim.normalization, "row|spectral");
  c_sim->add_option("--errors", sim.errors,
                    "normal|gamma|gamma-half|laplace|chi2");
  c_sim->add_option("--reps", sim.reps);
  c_sim->add_option("--seed", sim.seed);
  c_sim->add_option("--method", sim.methods,
                    "estimators (repeatable); empty = design default");
  c_sim->add_option("--out", sim.out);

  ReplicateArgs rt;
  auto* c_rt = app.add_subcommand("replicate-table",
                                  "re-run a published table grid");
  c_rt->add_option("--table", rt.table, "1|2|3|4|S.1");
  c_rt->add_option("--scale", rt.scale,
                   "divide the published replication count by this");
  c_rt->add_option("--seed", rt.seed);
  c_rt->add_option("--out", rt.out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;  // --help is success; anything else is usage
  }

  if (const char* env = std::getenv("SAR_THREADS")) threads = std::atoi(env);
  if (threads > 0) Eigen::setNbThreads(threads);

  try {
    if (c_gw->parsed()) return run_gen_weights(gw);
    if (c_dg->parsed()) return run_diagnose(dg);
    if (c_es->parsed()) return run_estimate(es);
    if (c_ci->parsed()) return run_ci(ci);
    if (c_sim->parsed()) return run_simulate(sim);
    if (c_rt->parsed()) return run_replicate(rt);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
