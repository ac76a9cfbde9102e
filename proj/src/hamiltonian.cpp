#include "polaron/hamiltonian.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace polaron {

void LatticeSpec::validate() const {
  if (num_sites < 1) throw std::invalid_argument("LatticeSpec: num_sites must be >= 1");
  if (phonon_levels < 1) throw std::invalid_argument("LatticeSpec: phonon_levels must be >= 1");
  if (!(hopping > 0.0)) throw std::invalid_argument("LatticeSpec: hopping t must be > 0");
  if (!(phonon_frequency > 0.0))
    throw std::invalid_argument("LatticeSpec: phonon frequency omega must be > 0");
  if (!std::isfinite(onsite_energy) || !std::isfinite(coupling))
    throw std::invalid_argument("LatticeSpec: parameters must be finite");
}

SegmentSpec::SegmentSpec(std::vector<int> s) : sites(std::move(s)) {
  if (sites.empty()) throw std::invalid_argument("SegmentSpec: segment must contain at least one site");
  if (sites.front() < 0) throw std::invalid_argument("SegmentSpec: sites must be non-negative");
  for (std::size_t i = 0; i + 1 < sites.size(); ++i)
    if (sites[i + 1] != sites[i] + 1)
      throw std::invalid_argument("SegmentSpec: sites must be consecutive");
}

SegmentSpec SegmentSpec::window(int first, int size) {
  if (size < 1) throw std::invalid_argument("SegmentSpec: window size must be >= 1");
  std::vector<int> s(static_cast<std::size_t>(size));
  std::iota(s.begin(), s.end(), first);
  return SegmentSpec(std::move(s));
}

SparseOperator SparseOperator::from_triplets(
    Index dim, const std::vector<Eigen::Triplet<double, Index>>& entries) {
  if (dim < 0) throw std::invalid_argument("SparseOperator: negative dimension");
  Eigen::SparseMatrix<double> m(dim, dim);
  m.setFromTriplets(entries.begin(), entries.end());
  m.makeCompressed();
  for (int k = 0; k < m.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(m, k); it; ++it)
      if (!std::isfinite(it.value()))
        throw std::invalid_argument("SparseOperator: entries must be finite");
  Eigen::SparseMatrix<double> tr = m.transpose();
  if ((m - tr).squaredNorm() != 0.0)
    throw std::invalid_argument("SparseOperator: matrix must be symmetric");
  return SparseOperator{std::move(m)};
}

SparseOperator build_segment_hamiltonian(const LatticeSpec& lattice, const SegmentSpec& segment) {
  lattice.validate();
  if (segment.first() < 0 || segment.past_end() > lattice.num_sites)
    throw std::invalid_argument("build_segment_hamiltonian: segment does not fit inside the lattice");

  const int nk = segment.size();
  const int np = lattice.phonon_levels;
  const BasisConfig basis(nk, np);
  const Index dim = basis.dimension();
  const Index phonon_block = basis.particle_stride();

  const double eps = lattice.onsite_energy;
  const double omega = lattice.phonon_frequency;
  const double g = lattice.coupling;
  const double t = lattice.hopping;

  std::vector<Eigen::Triplet<double, Index>> entries;
  entries.reserve(static_cast<std::size_t>(dim) * 5);

  std::vector<int> occ(static_cast<std::size_t>(nk), 0);
  for (int p = 0; p < nk; ++p) {
    std::fill(occ.begin(), occ.end(), 0);
    int occ_sum = 0;
    for (Index o = 0; o < phonon_block; ++o) {
      const Index idx = p * phonon_block + o;
      const double diag = eps + omega * occ_sum;
      if (diag != 0.0) entries.emplace_back(idx, idx, diag);
      if (p + 1 < nk) {
        entries.emplace_back(idx, idx + phonon_block, -t);
        entries.emplace_back(idx + phonon_block, idx, -t);
      }
      const int m = occ[static_cast<std::size_t>(p)];
      if (g != 0.0 && m + 1 < np) {
        const double v = g * std::sqrt(m + 1.0);
        const Index jdx = idx + basis.occupation_weight(p);
        entries.emplace_back(idx, jdx, v);
        entries.emplace_back(jdx, idx, v);
      }
      for (int j = nk - 1; j >= 0; --j) {  // occupation odometer
        auto& digit = occ[static_cast<std::size_t>(j)];
        if (digit + 1 < np) {
          ++digit;
          ++occ_sum;
          break;
        }
        occ_sum -= digit;
        digit = 0;
      }
    }
  }
  return SparseOperator::from_triplets(dim, entries);
}

double coupling_lambda(double g, double t, double omega) {
  if (!(t > 0.0) || !(omega > 0.0))
    throw std::invalid_argument("coupling_lambda: t and omega must be > 0");
  return g * g / (2.0 * t * omega);
}

double g_for_lambda(double lambda, double t, double omega) {
  if (lambda < 0.0) throw std::invalid_argument("g_for_lambda: lambda must be >= 0");
  if (!(t > 0.0) || !(omega > 0.0))
    throw std::invalid_argument("g_for_lambda: t and omega must be > 0");
  return std::sqrt(2.0 * t * omega * lambda);
}

double strong_coupling_energy(double eps, double t, double omega, double lambda) {
  if (!(lambda > 0.0))
    throw std::invalid_argument("strong_coupling_energy: lambda must be > 0");
  if (!(omega > 0.0))
    throw std::invalid_argument("strong_coupling_energy: omega must be > 0");
  return eps - 2.0 * lambda * t - t / lambda - 2.0 * t * std::exp(-2.0 * lambda * t / omega);
}

}  // namespace polaron
