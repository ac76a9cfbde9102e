#pragma once

#include <cstdint>
#include <vector>

namespace polaron {

using Index = std::int64_t;

/// Mixed-radix layout for the one-particle x multi-oscillator space of a
/// site set. The particle position is the most significant digit; the
/// per-site phonon occupations follow in site order, so the phonon block
/// belonging to one particle position is a contiguous stride.
struct BasisConfig {
  int num_sites = 1;
  int phonon_levels = 1;  // occupations run 0 .. phonon_levels-1

  BasisConfig(int sites, int levels);

  Index dimension() const { return dimension_; }
  /// Stride between consecutive particle positions (= phonon_levels^num_sites).
  Index particle_stride() const { return particle_stride_; }
  /// Weight of the occupation digit at `site`.
  Index occupation_weight(int site) const { return weights_[static_cast<std::size_t>(site)]; }

 private:
  Index dimension_ = 1;
  Index particle_stride_ = 1;
  std::vector<Index> weights_;
};

struct BasisState {
  int particle_site = 0;
  std::vector<int> occupations;
};

/// num_sites * phonon_levels^num_sites, rejected if it overflows Index.
Index basis_size(int num_sites, int phonon_levels);

Index index_of(const BasisState& state, const BasisConfig& config);
BasisState state_of(Index index, const BasisConfig& config);

}  // namespace polaron
