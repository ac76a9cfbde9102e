#include "polaron/oracle.hpp"

#include <stdexcept>

namespace polaron::oracle {

SparseOperator full_hamiltonian(const LatticeSpec& lattice, Index dimension_cap) {
  lattice.validate();
  const Index dim = basis_size(lattice.num_sites, lattice.phonon_levels);
  if (dim > dimension_cap)
    throw std::invalid_argument("full_hamiltonian: dimension exceeds the oracle cap");
  return build_segment_hamiltonian(lattice, SegmentSpec::window(0, lattice.num_sites));
}

EigenResult exact_ground(const LatticeSpec& lattice, const SolverOptions& options,
                         Index dimension_cap) {
  return lowest_eigenpair(full_hamiltonian(lattice, dimension_cap), options);
}

FullVector embed(const SegmentState& state, const LatticeSpec& lattice, Index dimension_cap) {
  lattice.validate();
  if (state.phonon_levels != lattice.phonon_levels)
    throw std::invalid_argument("embed: phonon truncation mismatch with lattice");
  if (state.segment.first() < 0 || state.segment.past_end() > lattice.num_sites)
    throw std::invalid_argument("embed: segment does not fit inside the lattice");
  const BasisConfig full(lattice.num_sites, lattice.phonon_levels);
  if (full.dimension() > dimension_cap)
    throw std::invalid_argument("embed: dimension exceeds the oracle cap");
  const BasisConfig local(state.segment.size(), state.phonon_levels);
  if (state.amplitudes.size() != local.dimension())
    throw std::invalid_argument("embed: amplitude length does not match the segment basis");

  FullVector out;
  out.amplitudes = Eigen::VectorXd::Zero(full.dimension());
  const int first = state.segment.first();
  for (Index li = 0; li < local.dimension(); ++li) {
    const BasisState ls = state_of(li, local);
    Index fi = (first + ls.particle_site) * full.particle_stride();
    for (int j = 0; j < local.num_sites; ++j)
      fi += ls.occupations[static_cast<std::size_t>(j)] * full.occupation_weight(first + j);
    out.amplitudes[fi] = state.amplitudes[li];
  }
  return out;
}

}  // namespace polaron::oracle
