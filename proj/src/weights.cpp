#include "sar/weights.hpp"

#include <Eigen/Eigenvalues>
#include <stdexcept>

#include "sar/rng.hpp"

namespace sar {

AdjacencyMatrix circulant_ahead_behind(int n, int h) {
  if (h < 1) throw std::invalid_argument("circulant: h must be >= 1");
  if (n < 2 * h + 2)
    throw std::invalid_argument("circulant: need n >= 2h+2");
  AdjacencyMatrix a;
  a.entries = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int d = 1; d <= h; ++d) {
      a.entries(i, (i + d) % n) = 1.0;
      a.entries(i, (i - d + n) % n) = 1.0;
    }
  }
  return a;
}

AdjacencyMatrix watts_strogatz(int n, int h, double p, std::uint64_t seed) {
  if (p < 0.0 || p > 1.0)
    throw std::invalid_argument("watts_strogatz: p must be in [0,1]");
  AdjacencyMatrix a = circulant_ahead_behind(n, h);
  if (p == 0.0) return a;
  Rng rng(seed);
  // Visit each lattice edge (i, i+d) once, in a fixed order.
  for (int i = 0; i < n; ++i) {
    for (int d = 1; d <= h; ++d) {
      int j = (i + d) % n;
      if (rng.uniform() >= p) continue;
      if (a.entries(i, j) == 0.0) continue;  // already rewired away
      // Choose a fresh endpoint; resample on self-loop or duplicate.
      // A full row means no legal target exists; keep the edge then.
      int w = -1;
      for (int attempt = 0; attempt < 16 * n; ++attempt) {
        int c = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
        if (c != i && a.entries(i, c) == 0.0) {
          w = c;
          break;
        }
      }
      if (w < 0) continue;
      a.entries(i, j) = a.entries(j, i) = 0.0;
      a.entries(i, w) = a.entries(w, i) = 1.0;
    }
  }
  return a;
}

AdjacencyMatrix erdos_renyi(int n, double p, std::uint64_t seed) {
  if (p < 0.0 || p > 1.0)
    throw std::invalid_argument("erdos_renyi: p must be in [0,1]");
  AdjacencyMatrix a;
  a.entries = Eigen::MatrixXd::Zero(n, n);
  Rng rng(seed);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (rng.uniform() < p) a.entries(i, j) = a.entries(j, i) = 1.0;
  return a;
}

WeightsMatrix group_interaction(int R, int m) {
  if (R < 1) throw std::invalid_argument("group_interaction: R must be >= 1");
  if (m <= 1) throw std::invalid_argument("group_interaction: m must be > 1");
  Eigen::MatrixXd B =
      (Eigen::MatrixXd::Ones(m, m) - Eigen::MatrixXd::Identity(m, m)) /
      (m - 1.0);
  WeightsMatrix w;
  w.entries = Eigen::MatrixXd::Zero(R * m, R * m);
  for (int r = 0; r < R; ++r) w.entries.block(r * m, r * m, m, m) = B;
  w.normalization = Normalization::row;
  w.block_sizes.assign(static_cast<std::size_t>(R), m);
  return w;
}

WeightsMatrix block_diag(const std::vector<WeightsMatrix>& blocks) {
  if (blocks.empty()) throw std::invalid_argument("block_diag: empty list");
  int n = 0;
  for (const auto& b : blocks) {
    if (b.entries.rows() != b.entries.cols())
      throw std::invalid_argument("block_diag: blocks must be square");
    n += b.n();
  }
  WeightsMatrix w;
  w.entries = Eigen::MatrixXd::Zero(n, n);
  int at = 0;
  for (const auto& b : blocks) {
    w.entries.block(at, at, b.n(), b.n()) = b.entries;
    w.block_sizes.push_back(b.n());
    at += b.n();
  }
  w.normalization = blocks.front().normalization;
  for (const auto& b : blocks)
    if (b.normalization != w.normalization)
      w.normalization = Normalization::none;
  return w;
}

double spectral_radius(const Eigen::MatrixXd& m) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(m, /*computeEigenvectors=*/false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

WeightsMatrix normalize(const Eigen::MatrixXd& m, Normalization mode) {
  WeightsMatrix w;
  w.normalization = mode;
  if (mode == Normalization::row) {
    Eigen::VectorXd sums = m.rowwise().sum();
    if ((sums.array().abs() < 1e-14).any())
      throw std::invalid_argument(
          "normalize(row): zero row (isolated vertex)");
    w.entries = sums.cwiseInverse().asDiagonal() * m;
  } else if (mode == Normalization::spectral) {
    double rho = spectral_radius(m);
    if (rho <= 1e-14)
      throw std::invalid_argument("normalize(spectral): zero spectral radius");
    w.entries = m / rho;
  } else {
    w.entries = m;
  }
  return w;
}

WeightsMatrix normalize(const AdjacencyMatrix& a, Normalization mode) {
  return normalize(a.entries, mode);
}

namespace {

// Iterative DFS over the nonzero pattern; transpose=true follows edges
// backwards.
void reach(const Eigen::MatrixXd& a, int start, bool transpose,
           std::vector<char>& seen) {
  const int n = static_cast<int>(a.rows());
  std::vector<int> stack{start};
  seen.assign(static_cast<std::size_t>(n), 0);
  seen[static_cast<std::size_t>(start)] = 1;
  while (!stack.empty()) {
    int u = stack.back();
    stack.pop_back();
    for (int v = 0; v < n; ++v) {
      double e = transpose ? a(v, u) : a(u, v);
      if (e != 0.0 && !seen[static_cast<std::size_t>(v)]) {
        seen[static_cast<std::size_t>(v)] = 1;
        stack.push_back(v);
      }
    }
  }
}

}  // namespace

bool is_irreducible(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols())
    throw std::invalid_argument("is_irreducible: matrix must be square");
  if (a.rows() == 0) return false;
  // Strongly connected iff every vertex is reachable from vertex 0 and
  // vertex 0 is reachable from every vertex.
  std::vector<char> fwd, bwd;
  reach(a, 0, false, fwd);
  reach(a, 0, true, bwd);
  for (std::size_t i = 0; i < fwd.size(); ++i)
    if (!fwd[i] || !bwd[i]) return false;
  return true;
}

}  // namespace sar
