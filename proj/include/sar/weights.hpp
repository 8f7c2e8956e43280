/* Spatial weights matrices.
 *
 * W is the n x n interaction matrix of the SAR model y = lambda*W*y + X*beta
 * + sigma*eps. Generators cover the designs used by the simulations:
 *   - circulant "h ahead, h behind" ring lattices,
 *   - Watts-Strogatz rewirings of the circulant,
 *   - Erdos-Renyi G(n,p) graphs,
 *   - group interaction W = I_R (x) B_m with B_m = (ii' - I)/(m-1),
 *   - block-diagonal assemblies for panels of networks.
 * Normalization is by row sums (row-stochastic W) or by the spectral radius;
 * either way the largest real eigenvalue becomes 1 for a nonnegative
 * irreducible matrix.
 */
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace sar {

// Binary, zero-diagonal adjacency matrix (stored dense; n stays small here).
struct AdjacencyMatrix {
  Eigen::MatrixXd entries;  // 0/1, zero diagonal
  int n() const { return static_cast<int>(entries.rows()); }
};

enum class Normalization { none, row, spectral };

struct WeightsMatrix {
  Eigen::MatrixXd entries;
  Normalization normalization = Normalization::none;
  std::vector<int> block_sizes;  // nonempty only for block-diagonal W
  int n() const { return static_cast<int>(entries.rows()); }
};

// Ring lattice: vertex i linked to the h nearest vertices on each side.
// Requires n >= 2h+2 so that the neighborhoods do not wrap onto themselves.
AdjacencyMatrix circulant_ahead_behind(int n, int h);

// Watts-Strogatz: start from the circulant, visit each undirected edge once
// and, with probability p, rewire its far endpoint to a uniformly chosen
// non-self, non-duplicate target (resampling on collision). Edge count is
// preserved. Deterministic given the seed.
AdjacencyMatrix watts_strogatz(int n, int h, double p, std::uint64_t seed);

// Erdos-Renyi G(n,p): each unordered pair linked independently with prob p.
AdjacencyMatrix erdos_renyi(int n, double p, std::uint64_t seed);

// Group interaction: R groups of m members, everyone weighted equally to the
// other m-1 members of their group. Eigenvalues are 1 (mult R) and -1/(m-1)
// (mult R(m-1)).
WeightsMatrix group_interaction(int R, int m);

// Direct sum of square blocks; records block sizes.
WeightsMatrix block_diag(const std::vector<WeightsMatrix>& blocks);

// Row mode divides each row by its sum (error on zero rows); spectral mode
// divides every entry by the spectral radius (error on the zero matrix).
WeightsMatrix normalize(const AdjacencyMatrix& a, Normalization mode);
WeightsMatrix normalize(const Eigen::MatrixXd& m, Normalization mode);

// True iff the directed graph of the nonzero pattern is strongly connected.
bool is_irreducible(const Eigen::MatrixXd& a);
inline bool is_irreducible(const AdjacencyMatrix& a) {
  return is_irreducible(a.entries);
}
inline bool is_irreducible(const WeightsMatrix& w) {
  return is_irreducible(w.entries);
}

// Spectral radius (largest |eigenvalue|) of a dense matrix.
double spectral_radius(const Eigen::MatrixXd& m);

}  // namespace sar
