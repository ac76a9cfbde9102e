#pragma once

#include "polaron/stitching.hpp"

namespace polaron::oracle {

/// Amplitudes over the full-lattice basis; validation target for stitched
/// quantities on small lattices.
struct FullVector {
  Eigen::VectorXd amplitudes;
};

/// The Holstein Hamiltonian on all sites with every nearest-neighbour bond.
SparseOperator full_hamiltonian(const LatticeSpec& lattice, Index dimension_cap = 1000000);

/// Lowest eigenpair of the full operator.
EigenResult exact_ground(const LatticeSpec& lattice, const SolverOptions& options = {},
                         Index dimension_cap = 1000000);

/// Lifts a segment state into the full space: segment amplitudes on
/// configurations with the particle inside the segment and vacuum elsewhere.
FullVector embed(const SegmentState& state, const LatticeSpec& lattice,
                 Index dimension_cap = 1000000);

}  // namespace polaron::oracle
