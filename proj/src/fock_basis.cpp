#include "polaron/fock_basis.hpp"

#include <stdexcept>
#include <string>

namespace polaron {

namespace {

Index checked_mul(Index a, Index b) {
  Index out = 0;
  if (__builtin_mul_overflow(a, b, &out))
    throw std::invalid_argument("basis dimension overflows the 64-bit index type");
  return out;
}

}  // namespace

Index basis_size(int num_sites, int phonon_levels) {
  if (num_sites < 1 || phonon_levels < 1)
    throw std::invalid_argument("basis_size: num_sites and phonon_levels must be positive");
  Index dim = num_sites;
  for (int i = 0; i < num_sites; ++i) dim = checked_mul(dim, phonon_levels);
  return dim;
}

BasisConfig::BasisConfig(int sites, int levels) : num_sites(sites), phonon_levels(levels) {
  dimension_ = basis_size(sites, levels);
  particle_stride_ = dimension_ / sites;
  weights_.assign(static_cast<std::size_t>(sites), 1);
  for (int j = sites - 2; j >= 0; --j)
    weights_[static_cast<std::size_t>(j)] = weights_[static_cast<std::size_t>(j + 1)] * levels;
}

Index index_of(const BasisState& state, const BasisConfig& config) {
  if (static_cast<int>(state.occupations.size()) != config.num_sites)
    throw std::invalid_argument("index_of: occupation list length must equal num_sites");
  if (state.particle_site < 0 || state.particle_site >= config.num_sites)
    throw std::invalid_argument("index_of: particle_site out of range");
  Index idx = state.particle_site * config.particle_stride();
  for (int j = 0; j < config.num_sites; ++j) {
    const int m = state.occupations[static_cast<std::size_t>(j)];
    if (m < 0 || m >= config.phonon_levels)
      throw std::invalid_argument("index_of: occupation out of range at site " + std::to_string(j));
    idx += m * config.occupation_weight(j);
  }
  return idx;
}

BasisState state_of(Index index, const BasisConfig& config) {
  if (index < 0 || index >= config.dimension())
    throw std::invalid_argument("state_of: index out of range");
  BasisState state;
  state.particle_site = static_cast<int>(index / config.particle_stride());
  Index rem = index % config.particle_stride();
  state.occupations.resize(static_cast<std::size_t>(config.num_sites));
  for (int j = 0; j < config.num_sites; ++j) {
    const Index w = config.occupation_weight(j);
    state.occupations[static_cast<std::size_t>(j)] = static_cast<int>(rem / w);
    rem %= w;
  }
  return state;
}

}  // namespace polaron
