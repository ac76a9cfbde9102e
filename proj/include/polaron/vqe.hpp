#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "polaron/hamiltonian.hpp"
#include "polaron/stitching.hpp"

namespace polaron {

struct PauliTerm {
  double coefficient = 0.0;
  std::string word;  // length num_qubits over {I, X, Y, Z}; position 0 acts on the top qubit
};

struct PauliExpansion {
  int num_qubits = 0;
  std::vector<PauliTerm> terms;
};

/// Layered R_Y / CNOT-chain circuit applied to |0...0>.
///
/// Full layout (default): an opening rotation layer followed by `depth`
/// blocks of [CNOT chain, rotation layer]; n*(depth+1) angles.
/// final_layer_only: `depth` blocks of [rotation layer, CNOT chain];
/// n*depth angles. Qubit 0 is the most significant bit of the state index.
struct AnsatzConfig {
  int num_qubits = 1;
  int depth = 1;
  bool final_layer_only = false;
  Eigen::VectorXd parameters;

  int parameter_count() const {
    return final_layer_only ? num_qubits * depth : num_qubits * (depth + 1);
  }
};

struct OptimizerConfig {
  enum class Method { nelder_mead, parameter_shift };
  Method method = Method::nelder_mead;
  int restarts = 8;
  long max_evaluations = 20000;  // per restart
  double f_tol = 1e-10;
  double x_tol = 1e-8;
  double initial_step = 0.5;    // simplex edge, radians
  double learning_rate = 0.1;   // parameter-shift descent
};

struct VqeOutcome {
  double energy = 0.0;
  Eigen::VectorXd parameters;
  long evaluations = 0;
  int restarts_used = 0;
};

/// Qubits needed to hold a segment basis: ceil(log2(N_k * N_p^{N_k})).
int qubits_for_segment(int segment_size, int phonon_levels);
/// Qubits for the full lattice, evaluated in log space when the dimension
/// overflows 64 bits.
int qubits_for_full(int num_sites, int phonon_levels);

/// Extends an operator to 2^n dimensions; the padded diagonal carries a
/// penalty placed above the Gershgorin upper bound of the physical block
/// when none is given, so the global ground state stays physical.
SparseOperator pad_to_qubits(const SparseOperator& op, int num_qubits,
                             std::optional<double> penalty = std::nullopt);

/// All 4^n Pauli coefficients via an in-place structured transform over the
/// dense entry array (O(4^n n)). Terms with |coefficient| <= drop_tol are
/// omitted; for symmetric input every emitted word has an even Y count.
PauliExpansion pauli_decompose(const SparseOperator& op, int num_qubits, double drop_tol = 1e-12,
                               int max_qubits = 14);

/// Dense rebuild of an expansion (small n); test aid for the transform.
Eigen::MatrixXd pauli_reconstruct(const PauliExpansion& expansion);

Eigen::VectorXd ansatz_state(const AnsatzConfig& config);

double expectation(const SparseOperator& op, const Eigen::VectorXd& state);
double expectation(const PauliExpansion& expansion, const Eigen::VectorXd& state);

/// Exact gradient of the ansatz expectation via the parameter-shift rule.
Eigen::VectorXd parameter_shift_gradient(const SparseOperator& op, const AnsatzConfig& at);

/// Minimizes <psi(theta)| op |psi(theta)> from `restarts` seeded random
/// starts; deterministic for a fixed seed. `shape` supplies the circuit
/// layout, its parameters field is ignored.
VqeOutcome vqe_minimize(const SparseOperator& op, const AnsatzConfig& shape,
                        const OptimizerConfig& optimizer, std::uint64_t seed);

struct VqeEcConfig {
  double s_cutoff = 1e-10;
  int depth = 1;
  bool final_layer_only = false;
  OptimizerConfig optimizer;
  std::optional<double> pad_penalty;
};

/// ec_ground_energy with the segment eigensolve replaced by a VQE run on the
/// padded segment operator; the optimized statevector is truncated back to
/// the physical block and renormalized before stitching.
EcRun ec_vqe_ground_energy(const LatticeSpec& lattice, int segment_size, bool include_overlaps,
                           const VqeEcConfig& config, std::uint64_t seed);

}  // namespace polaron
