#include "polaron/stitching.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace polaron {

SegmentState make_segment_state(SegmentSpec segment, int phonon_levels,
                                Eigen::VectorXd amplitudes) {
  const BasisConfig basis(segment.size(), phonon_levels);
  if (amplitudes.size() != basis.dimension())
    throw std::invalid_argument("SegmentState: amplitude length does not match the segment basis");
  if (std::abs(amplitudes.norm() - 1.0) > 1e-10)
    throw std::invalid_argument("SegmentState: amplitudes must have unit norm");
  return SegmentState{std::move(segment), phonon_levels, std::move(amplitudes)};
}

std::vector<SegmentSpec> generate_segments(int num_sites, int segment_size,
                                           bool include_overlaps) {
  if (num_sites < 1) throw std::invalid_argument("generate_segments: num_sites must be >= 1");
  if (segment_size < 1 || segment_size > num_sites)
    throw std::invalid_argument("generate_segments: segment_size must lie in [1, num_sites]");
  std::vector<SegmentSpec> out;
  if (include_overlaps) {
    for (int s = 0; s + segment_size <= num_sites; ++s)
      out.push_back(SegmentSpec::window(s, segment_size));
  } else {
    if (num_sites % segment_size != 0)
      throw std::invalid_argument(
          "generate_segments: num_sites must be divisible by segment_size when overlaps are off");
    for (int s = 0; s < num_sites; s += segment_size)
      out.push_back(SegmentSpec::window(s, segment_size));
  }
  return out;
}

namespace {

/// Precomputed geometry for a contraction over the shared sites of two
/// segments. Occupations outside the shared window are pinned to zero by the
/// vacuum embedding, so only N_p^{shared} configurations contribute.
struct ContractionPlan {
  int lo = 0, hi = 0;  // shared window [lo, hi)
  int np = 1;
  Index stride_a = 0, stride_b = 0;
  int first_a = 0, first_b = 0;
  std::vector<Index> wa, wb;  // occupation weights of shared sites
};

ContractionPlan make_plan(const SegmentState& a, const SegmentState& b) {
  if (a.phonon_levels != b.phonon_levels)
    throw std::invalid_argument("contraction: phonon truncation mismatch between states");
  const BasisConfig ba(a.segment.size(), a.phonon_levels);
  const BasisConfig bb(b.segment.size(), b.phonon_levels);
  if (a.amplitudes.size() != ba.dimension() || b.amplitudes.size() != bb.dimension())
    throw std::invalid_argument("contraction: amplitude length does not match the segment basis");
  ContractionPlan plan;
  plan.np = a.phonon_levels;
  plan.lo = std::max(a.segment.first(), b.segment.first());
  plan.hi = std::min(a.segment.past_end(), b.segment.past_end());
  plan.stride_a = ba.particle_stride();
  plan.stride_b = bb.particle_stride();
  plan.first_a = a.segment.first();
  plan.first_b = b.segment.first();
  for (int site = plan.lo; site < plan.hi; ++site) {
    plan.wa.push_back(ba.occupation_weight(site - plan.first_a));
    plan.wb.push_back(bb.occupation_weight(site - plan.first_b));
  }
  return plan;
}

/// Iterates all shared-occupation tuples, invoking fn(occA, occB, digits, sum)
/// with the partial basis offsets for both states.
template <class Fn>
void for_each_shared_tuple(const ContractionPlan& plan, Fn&& fn) {
  const int s = std::max(0, plan.hi - plan.lo);
  std::vector<int> digits(static_cast<std::size_t>(s), 0);
  Index occ_a = 0, occ_b = 0;
  int sum = 0;
  while (true) {
    fn(occ_a, occ_b, digits, sum);
    int j = s - 1;
    for (; j >= 0; --j) {
      auto& digit = digits[static_cast<std::size_t>(j)];
      if (digit + 1 < plan.np) {
        ++digit;
        occ_a += plan.wa[static_cast<std::size_t>(j)];
        occ_b += plan.wb[static_cast<std::size_t>(j)];
        ++sum;
        break;
      }
      occ_a -= digit * plan.wa[static_cast<std::size_t>(j)];
      occ_b -= digit * plan.wb[static_cast<std::size_t>(j)];
      sum -= digit;
      digit = 0;
    }
    if (j < 0) break;
  }
}

}  // namespace

double overlap(const SegmentState& a, const SegmentState& b) {
  const ContractionPlan plan = make_plan(a, b);
  if (plan.lo >= plan.hi) return 0.0;  // disjoint particle supports
  double acc = 0.0;
  for_each_shared_tuple(plan, [&](Index occ_a, Index occ_b, const std::vector<int>&, int) {
    for (int p = plan.lo; p < plan.hi; ++p)
      acc += a.amplitudes[(p - plan.first_a) * plan.stride_a + occ_a] *
             b.amplitudes[(p - plan.first_b) * plan.stride_b + occ_b];
  });
  return acc;
}

double cross_matrix_element(const SegmentState& a, const SegmentState& b,
                            const LatticeSpec& lattice) {
  lattice.validate();
  if (a.phonon_levels != lattice.phonon_levels)
    throw std::invalid_argument("cross_matrix_element: phonon truncation mismatch with lattice");
  if (a.segment.past_end() > lattice.num_sites || b.segment.past_end() > lattice.num_sites)
    throw std::invalid_argument("cross_matrix_element: segment does not fit inside the lattice");
  const ContractionPlan plan = make_plan(a, b);

  // Hopping a_v^dag a_u contributes when the ket particle sits at u in b's
  // segment and the bra particle at v in a's segment; this includes the
  // boundary bonds that join the two segments.
  std::vector<std::pair<int, int>> bonds;  // (v in a, u in b)
  for (int x = 0; x + 1 < lattice.num_sites; ++x) {
    if (a.segment.contains(x) && b.segment.contains(x + 1)) bonds.emplace_back(x, x + 1);
    if (a.segment.contains(x + 1) && b.segment.contains(x)) bonds.emplace_back(x + 1, x);
  }

  const double eps = lattice.onsite_energy;
  const double omega = lattice.phonon_frequency;
  const double g = lattice.coupling;
  const double t = lattice.hopping;
  const int np = plan.np;

  double acc = 0.0;
  for_each_shared_tuple(plan, [&](Index occ_a, Index occ_b, const std::vector<int>& digits,
                                  int sum) {
    // On-site, phonon-energy and coupling terms need the particle (and any
    // phonons) inside the shared window; everything else is killed by the
    // vacuum on one side or the other.
    for (int p = plan.lo; p < plan.hi; ++p) {
      const Index ia = (p - plan.first_a) * plan.stride_a + occ_a;
      const Index ib = (p - plan.first_b) * plan.stride_b + occ_b;
      const double va = a.amplitudes[ia];
      const double vb = b.amplitudes[ib];
      acc += (eps + omega * sum) * va * vb;
      if (g != 0.0) {
        const int m = digits[static_cast<std::size_t>(p - plan.lo)];
        const Index w = plan.wa[static_cast<std::size_t>(p - plan.lo)];
        if (m + 1 < np) acc += g * std::sqrt(m + 1.0) * a.amplitudes[ia + w] * vb;
        if (m > 0) acc += g * std::sqrt(static_cast<double>(m)) * a.amplitudes[ia - w] * vb;
      }
    }
    for (const auto& [v_site, u_site] : bonds)
      acc += -t * a.amplitudes[(v_site - plan.first_a) * plan.stride_a + occ_a] *
             b.amplitudes[(u_site - plan.first_b) * plan.stride_b + occ_b];
  });
  return acc;
}

EffectiveProblem build_effective_problem(const std::vector<SegmentState>& states,
                                         const LatticeSpec& lattice) {
  if (states.empty())
    throw std::invalid_argument("build_effective_problem: at least one training state required");
  const int k = static_cast<int>(states.size());
  for (const auto& st : states) {
    if (std::abs(st.amplitudes.norm() - 1.0) > 1e-10)
      throw std::invalid_argument("build_effective_problem: training state is not normalized");
  }
  EffectiveProblem problem;
  problem.h_eff.resize(k, k);
  problem.s.resize(k, k);
  for (int i = 0; i < k; ++i) {
    for (int j = i; j < k; ++j) {
      const double sij = 0.5 * (overlap(states[i], states[j]) + overlap(states[j], states[i]));
      const double hij = 0.5 * (cross_matrix_element(states[i], states[j], lattice) +
                                cross_matrix_element(states[j], states[i], lattice));
      problem.s(i, j) = problem.s(j, i) = sij;
      problem.h_eff(i, j) = problem.h_eff(j, i) = hij;
    }
  }
  for (int i = 0; i < k; ++i) {
    if (std::abs(problem.s(i, i) - 1.0) >= 1e-10)
      throw std::invalid_argument("build_effective_problem: S diagonal deviates from 1");
    problem.s(i, i) = 1.0;
  }
  problem.labels.reserve(states.size());
  for (const auto& st : states) problem.labels.push_back(st.segment);
  return problem;
}

EcResult solve_generalized(const EffectiveProblem& problem, double s_cutoff) {
  if (!(s_cutoff > 0.0)) throw std::invalid_argument("solve_generalized: s_cutoff must be > 0");
  const Eigen::Index k = problem.s.rows();
  if (k == 0 || problem.s.cols() != k || problem.h_eff.rows() != k || problem.h_eff.cols() != k)
    throw std::invalid_argument("solve_generalized: malformed effective problem");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> s_eig(problem.s);
  const Eigen::VectorXd sigma = s_eig.eigenvalues();  // ascending
  const double s_max = sigma(k - 1);
  if (!(s_max > 0.0))
    throw std::runtime_error("solve_generalized: overlap matrix has no positive modes");
  if (sigma(0) < -1e-10 * std::max(1.0, s_max))
    throw std::runtime_error("solve_generalized: overlap matrix is not positive semidefinite");
  const double cut = s_cutoff * s_max;
  Eigen::Index first_kept = 0;
  while (first_kept < k && sigma(first_kept) < cut) ++first_kept;
  const Eigen::Index r = k - first_kept;
  if (r == 0)
    throw std::runtime_error("solve_generalized: all overlap modes below cutoff (degenerate training set)");

  Eigen::MatrixXd x = s_eig.eigenvectors().rightCols(r) *
                      sigma.tail(r).cwiseSqrt().cwiseInverse().asDiagonal();
  Eigen::MatrixXd h_tilde = x.transpose() * problem.h_eff * x;
  h_tilde = 0.5 * (h_tilde + h_tilde.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> h_eig(h_tilde);

  EcResult result;
  result.energy = h_eig.eigenvalues()(0);
  result.coefficients = x * h_eig.eigenvectors().col(0);
  result.retained_modes = static_cast<int>(r);
  return result;
}

EcRun stitch_training_state(const LatticeSpec& lattice, const std::vector<SegmentSpec>& segments,
                            const Eigen::VectorXd& amplitudes, double s_cutoff) {
  std::vector<SegmentState> states;
  states.reserve(segments.size());
  for (const auto& seg : segments)
    states.push_back(make_segment_state(seg, lattice.phonon_levels, amplitudes));
  EffectiveProblem problem = build_effective_problem(states, lattice);

  EcRun run;
  run.result = solve_generalized(problem, s_cutoff);
  run.diagnostics.segment_dimension = amplitudes.size();
  run.diagnostics.num_segments = static_cast<int>(segments.size());
  run.diagnostics.retained_modes = run.result.retained_modes;
  run.diagnostics.h_eff_min_diagonal = problem.h_eff.diagonal().minCoeff();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> s_eig(problem.s);
  run.diagnostics.s_min_eigenvalue = s_eig.eigenvalues()(0);
  run.diagnostics.s_max_eigenvalue = s_eig.eigenvalues()(problem.s.rows() - 1);
  return run;
}

EcRun ec_ground_energy(const LatticeSpec& lattice, int segment_size, bool include_overlaps,
                       const EcConfig& config) {
  lattice.validate();
  const auto segments = generate_segments(lattice.num_sites, segment_size, include_overlaps);
  // All windows share one internal Hamiltonian, so a single eigensolve
  // provides every training vector.
  const SparseOperator h_seg =
      build_segment_hamiltonian(lattice, SegmentSpec::window(0, segment_size));
  const EigenResult ground = lowest_eigenpair(h_seg, config.solver);
  EcRun run = stitch_training_state(lattice, segments, ground.vector, config.s_cutoff);
  run.diagnostics.segment_energy = ground.energy;
  run.diagnostics.segment_residual = ground.residual_norm;
  return run;
}

}  // namespace polaron
