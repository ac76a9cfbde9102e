#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <vector>

#include "polaron/fock_basis.hpp"

namespace polaron {

/// Holstein chain parameters. Energies are in units of the hopping t; the
/// chain is open with nearest-neighbour hopping only.
struct LatticeSpec {
  int num_sites = 1;
  double onsite_energy = 0.0;
  double hopping = 1.0;
  double phonon_frequency = 1.0;
  double coupling = 0.0;
  int phonon_levels = 1;

  void validate() const;
};

/// Contiguous window of global site indices.
struct SegmentSpec {
  std::vector<int> sites;

  SegmentSpec() = default;
  explicit SegmentSpec(std::vector<int> s);
  static SegmentSpec window(int first, int size);

  int first() const { return sites.front(); }
  int size() const { return static_cast<int>(sites.size()); }
  int past_end() const { return sites.back() + 1; }
  bool contains(int site) const { return site >= first() && site < past_end(); }
  bool operator==(const SegmentSpec&) const = default;
};

/// Real symmetric sparse operator; the unit of every eigensolve here.
struct SparseOperator {
  Eigen::SparseMatrix<double> matrix;

  Index dimension() const { return matrix.rows(); }
  double coeff(Index i, Index j) const { return matrix.coeff(i, j); }
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const { return matrix * x; }

  /// Assembles from (row, col, value) entries, summing duplicates. Rejects
  /// non-finite values and any asymmetry.
  static SparseOperator from_triplets(Index dim,
                                      const std::vector<Eigen::Triplet<double, Index>>& entries);
};

/// Restriction of the Holstein Hamiltonian to a contiguous segment: on-site
/// energy, internal nearest-neighbour hoppings (-t), phonon energy and local
/// coupling g n_i (b_i^dag + b_i) with a hard occupation cap at
/// phonon_levels-1 (raising the top level annihilates).
SparseOperator build_segment_hamiltonian(const LatticeSpec& lattice, const SegmentSpec& segment);

/// Dimensionless coupling strength g^2 / (2 t omega).
double coupling_lambda(double g, double t, double omega);
/// Inverse of coupling_lambda at fixed t, omega.
double g_for_lambda(double lambda, double t, double omega);
/// Third-order strong-coupling approximation of the polaron ground energy.
double strong_coupling_energy(double eps, double t, double omega, double lambda);

}  // namespace polaron
