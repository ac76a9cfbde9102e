#pragma once

#include <Eigen/Dense>
#include <vector>

#include "polaron/hamiltonian.hpp"
#include "polaron/segment_solver.hpp"

namespace polaron {

/// Ground state of one decoupled segment. The represented full-lattice vector
/// is (amplitudes over the segment's local basis) x phonon vacuum on every
/// other site, with the particle confined to the segment.
struct SegmentState {
  SegmentSpec segment;
  int phonon_levels = 1;
  Eigen::VectorXd amplitudes;
};

/// Validating constructor: checks the amplitude length against the segment
/// basis and requires unit norm within 1e-10.
SegmentState make_segment_state(SegmentSpec segment, int phonon_levels,
                                Eigen::VectorXd amplitudes);

/// The k x k pair (H_eff, S) over a list of training states.
struct EffectiveProblem {
  Eigen::MatrixXd h_eff;
  Eigen::MatrixXd s;
  std::vector<SegmentSpec> labels;
};

struct EcResult {
  double energy = 0.0;
  Eigen::VectorXd coefficients;  // normalized so c^T S c = 1
  int retained_modes = 0;        // rank kept after overlap regularization
};

struct EcDiagnostics {
  Index segment_dimension = 0;
  int num_segments = 0;
  int retained_modes = 0;
  double segment_energy = 0.0;    // training-state Rayleigh quotient
  double segment_residual = 0.0;  // residual of the segment eigensolve
  double h_eff_min_diagonal = 0.0;
  double s_min_eigenvalue = 0.0;
  double s_max_eigenvalue = 0.0;
  // EC-VQE extras
  int num_qubits = 0;
  double vqe_energy = 0.0;   // optimizer objective on the padded operator
  double vqe_leakage = 0.0;  // norm lost to the padded block
  long vqe_evaluations = 0;
  int vqe_restarts = 0;
};

struct EcRun {
  EcResult result;
  EcDiagnostics diagnostics;
};

/// Without overlaps: the num_sites/segment_size disjoint tiles in site order
/// (num_sites must divide evenly). With overlaps: every contiguous window of
/// segment_size sites, in ascending start order.
std::vector<SegmentSpec> generate_segments(int num_sites, int segment_size, bool include_overlaps);

/// Full-space inner product of two embedded segment states, computed by
/// contraction over the shared sites only. Zero for disjoint segments.
double overlap(const SegmentState& a, const SegmentState& b);

/// <a| H_full |b> where H_full is the Holstein Hamiltonian on the whole
/// lattice with all nearest-neighbour hoppings restored. Evaluated term by
/// term; the cost is O(N_p^{|shared sites|}).
double cross_matrix_element(const SegmentState& a, const SegmentState& b,
                            const LatticeSpec& lattice);

/// Pairwise H_eff and S, symmetrized by averaging the (i,j) and (j,i)
/// evaluations; the S diagonal is pinned to 1 after a normalization check.
EffectiveProblem build_effective_problem(const std::vector<SegmentState>& states,
                                         const LatticeSpec& lattice);

/// Canonical orthogonalization: drop S modes below s_cutoff relative to the
/// largest S eigenvalue, then solve the ordinary problem in the retained
/// subspace.
EcResult solve_generalized(const EffectiveProblem& problem, double s_cutoff = 1e-10);

struct EcConfig {
  double s_cutoff = 1e-10;
  SolverOptions solver;
};

/// Stitches one shared training amplitude vector across every window and
/// solves the resulting generalized problem.
EcRun stitch_training_state(const LatticeSpec& lattice, const std::vector<SegmentSpec>& segments,
                            const Eigen::VectorXd& amplitudes, double s_cutoff);

/// End-to-end pipeline: decompose, solve one segment eigenproblem (reused
/// across all windows by translational symmetry), stitch, solve.
EcRun ec_ground_energy(const LatticeSpec& lattice, int segment_size, bool include_overlaps,
                       const EcConfig& config = {});

}  // namespace polaron
