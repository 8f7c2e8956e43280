/* Generates the two frozen panel fixtures with their expected estimates.
 *
 *   group:  group-interaction weights (R groups of m), intercept + one
 *           regressor, single SAR draw at lambda = 0.5.
 *   panel:  R small-world networks with per-network fixed effects,
 *           k_tilde = 2 regressors plus their spatial lags, draw at
 *           lambda = 0.5; expected values for both the deviation-transform
 *           and the adjusted estimators.
 *
 * Usage: make_panel_fixtures <out_dir>
 */
#include <cstdio>
#include <fstream>
#include <string>

#include "sar/estimate.hpp"
#include "sar/io.hpp"
#include "sar/model.hpp"
#include "sar/panels.hpp"
#include "sar/rng.hpp"
#include "sar/weights.hpp"

using namespace sar;

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: %s <out_dir>\n", argv[0]);
    return 1;
  }
  std::string out = argv[1];

  {  // Group-interaction fixture.
    const int R = 10, m = 5, n = R * m;
    WeightsMatrix W = group_interaction(R, m);
    Rng rng(11, 0);
    Eigen::MatrixXd X(n, 2);
    X.col(0).setOnes();
    for (int i = 0; i < n; ++i) X(i, 1) = rng.normal();
    SarParams par{0.5, Eigen::VectorXd::Ones(2), 1.0};
    Eigen::VectorXd y =
        simulate_y(W.entries, X, par, ErrorDist::normal, rng);
    SarData d(y, X, W);
    EstimateResult ml = qmle(d), am = adjusted_qmle(d);
    write_matrix_market(out + "/group_w.mtx", W.entries);
    write_csv_matrix(out + "/group_y.csv", y);
    write_csv_matrix(out + "/group_x.csv", X);
    std::ofstream meta(out + "/group_meta.json");
    meta.precision(17);
    meta << "{\n  \"R\": " << R << ",\n  \"m\": " << m
         << ",\n  \"lambda_true\": 0.5,\n  \"lambda_hat_ml\": "
         << ml.lambda_hat
         << ",\n  \"lambda_hat_aml\": " << am.lambda_hat << "\n}\n";
    std::printf("group: ml = %.6f, aml = %.6f\n", ml.lambda_hat,
                am.lambda_hat);
  }

  {  // Network fixed-effects fixture.
    const int R = 5, m = 12, kt = 2;
    std::vector<WeightsMatrix> blocks;
    std::vector<Eigen::MatrixXd> xblocks;
    Rng rng(25, 0);
    Eigen::VectorXd alpha(R);
    for (int r = 0; r < R; ++r) {
      blocks.push_back(normalize(
          watts_strogatz(m, 3, 0.2, 100 + static_cast<std::uint64_t>(r)),
          Normalization::row));
      Eigen::MatrixXd xt(m, kt);
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < kt; ++j) xt(i, j) = rng.normal();
      xblocks.push_back(xt);
      alpha(r) = rng.normal();
    }
    // Assemble and draw y = S^-1(0.5) (X_tilde*1 + W X_tilde*1 + alpha + eps).
    int n = R * m;
    Eigen::VectorXd y;
    {
      std::vector<WeightsMatrix> tmp = blocks;
      WeightsMatrix W = block_diag(tmp);
      Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
      for (int r = 0; r < R; ++r) {
        Eigen::VectorXd part =
            xblocks[r].rowwise().sum() +
            blocks[r].entries * xblocks[r].rowwise().sum();
        rhs.segment(r * m, m) =
            part + Eigen::VectorXd::Constant(m, alpha(r));
      }
      for (int i = 0; i < n; ++i) rhs(i) += rng.normal();
      Eigen::MatrixXd S =
          Eigen::MatrixXd::Identity(n, n) - 0.5 * W.entries;
      y = S.partialPivLu().solve(rhs);
    }
    std::vector<Eigen::MatrixXd> wb;
    for (const auto& b : blocks) wb.push_back(b.entries);
    NetworkPanel panel = make_network_panel(wb, xblocks, y);
    EstimateResult ll = lll_estimator(panel);
    EstimateResult am = adjusted_qmle(SarData(y, panel.X, panel.W));
    write_matrix_market(out + "/panel_w.mtx", panel.W.entries);
    write_csv_matrix(out + "/panel_y.csv", y);
    Eigen::MatrixXd xt_stacked(n, kt);
    for (int r = 0; r < R; ++r) xt_stacked.middleRows(r * m, m) = xblocks[r];
    write_csv_matrix(out + "/panel_xt.csv", xt_stacked);
    std::ofstream meta(out + "/panel_meta.json");
    meta.precision(17);
    meta << "{\n  \"R\": " << R << ",\n  \"m\": " << m
         << ",\n  \"k_tilde\": " << kt
         << ",\n  \"lambda_true\": 0.5,\n  \"lambda_hat_lll\": "
         << ll.lambda_hat
         << ",\n  \"lambda_hat_aml\": " << am.lambda_hat << "\n}\n";
    std::printf("panel: lll = %.6f, aml = %.6f\n", ll.lambda_hat,
                am.lambda_hat);
  }
  return 0;
}
