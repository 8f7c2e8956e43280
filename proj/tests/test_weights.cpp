#include <Eigen/Dense>
#include <cmath>

#include "doctest.h"
#include "sar/weights.hpp"

using sar::Normalization;

TEST_CASE("circulant ring lattice: symmetric, zero diagonal, degree 2h") {
  auto a = sar::circulant_ahead_behind(12, 3);
  CHECK(a.n() == 12);
  CHECK(a.entries.diagonal().norm() == 0.0);
  CHECK((a.entries - a.entries.transpose()).norm() == 0.0);
  CHECK((a.entries.rowwise().sum().array() == 6.0).all());
  CHECK_THROWS_AS(sar::circulant_ahead_behind(7, 3), std::invalid_argument);
  CHECK_THROWS_AS(sar::circulant_ahead_behind(10, 0), std::invalid_argument);
}

TEST_CASE("watts_strogatz: p=0 is the lattice; rewiring preserves edges") {
  auto lattice = sar::circulant_ahead_behind(30, 2);
  auto p0 = sar::watts_strogatz(30, 2, 0.0, 99);
  CHECK((p0.entries - lattice.entries).norm() == 0.0);

  for (double p : {0.2, 0.9, 1.0}) {
    auto g = sar::watts_strogatz(30, 2, p, 7);
    CHECK(g.entries.diagonal().norm() == 0.0);
    CHECK((g.entries - g.entries.transpose()).norm() == 0.0);
    CHECK(g.entries.sum() == lattice.entries.sum());  // edge count kept
  }

  auto g1 = sar::watts_strogatz(30, 2, 0.5, 7);
  auto g2 = sar::watts_strogatz(30, 2, 0.5, 7);
  auto g3 = sar::watts_strogatz(30, 2, 0.5, 8);
  CHECK((g1.entries - g2.entries).norm() == 0.0);  // deterministic in seed
  CHECK((g1.entries - g3.entries).norm() > 0.0);
}

TEST_CASE("erdos_renyi: symmetric with edge fraction near p") {
  const int n = 200;
  auto g = sar::erdos_renyi(n, 0.1, 5);
  CHECK((g.entries - g.entries.transpose()).norm() == 0.0);
  CHECK(g.entries.diagonal().norm() == 0.0);
  double frac = g.entries.sum() / (n * (n - 1.0));
  CHECK(std::abs(frac - 0.1) < 0.01);
}

TEST_CASE("group interaction: row-stochastic with known spectrum") {
  auto w = sar::group_interaction(3, 5);
  CHECK(w.n() == 15);
  CHECK(w.normalization == Normalization::row);
  CHECK(w.block_sizes == std::vector<int>(3, 5));
  CHECK((w.entries.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-14);
  // Spectrum: 1 with multiplicity R, -1/(m-1) with multiplicity R(m-1).
  Eigen::VectorXd evs =
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(w.entries).eigenvalues();
  int ones = 0, small = 0;
  for (int i = 0; i < evs.size(); ++i) {
    if (std::abs(evs(i) - 1.0) < 1e-12) ++ones;
    if (std::abs(evs(i) + 0.25) < 1e-12) ++small;
  }
  CHECK(ones == 3);
  CHECK(small == 12);
}

TEST_CASE("block_diag stacks blocks and records sizes") {
  auto b1 = sar::group_interaction(1, 3);
  auto b2 = sar::group_interaction(1, 4);
  auto w = sar::block_diag({b1, b2});
  CHECK(w.n() == 7);
  CHECK(w.block_sizes == std::vector<int>({3, 4}));
  CHECK(w.entries.block(0, 3, 3, 4).norm() == 0.0);
  CHECK(w.entries.block(3, 0, 4, 3).norm() == 0.0);
  CHECK((w.entries.block(0, 0, 3, 3) - b1.entries).norm() == 0.0);
}

TEST_CASE("row normalization makes rows sum to one; zero rows rejected") {
  auto a = sar::circulant_ahead_behind(10, 2);
  auto w = sar::normalize(a, Normalization::row);
  CHECK((w.entries.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-14);

  Eigen::MatrixXd iso = Eigen::MatrixXd::Zero(3, 3);
  iso(0, 1) = iso(1, 0) = 1.0;  // vertex 2 isolated
  CHECK_THROWS_AS(sar::normalize(iso, Normalization::row),
                  std::invalid_argument);
}

TEST_CASE("spectral normalization sets the spectral radius to one") {
  auto a = sar::circulant_ahead_behind(11, 2);
  auto w = sar::normalize(a, Normalization::spectral);
  CHECK(sar::spectral_radius(w.entries) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("spectral radius of the ring lattice is its degree") {
  // Nonnegative row-regular matrix: Perron root equals the common row sum.
  auto a = sar::circulant_ahead_behind(16, 3);
  CHECK(sar::spectral_radius(a.entries) == doctest::Approx(6.0).epsilon(1e-12));
}

TEST_CASE("irreducibility detects disconnected structure") {
  CHECK(sar::is_irreducible(sar::circulant_ahead_behind(10, 1)));
  auto two = sar::block_diag(
      {sar::group_interaction(1, 3), sar::group_interaction(1, 3)});
  CHECK_FALSE(sar::is_irreducible(two));
}
