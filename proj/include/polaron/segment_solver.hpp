#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "polaron/hamiltonian.hpp"

namespace polaron {

struct EigenResult {
  double energy = 0.0;
  Eigen::VectorXd vector;       // unit norm, entry of largest magnitude positive
  double residual_norm = 0.0;   // ||H v - E v||
};

struct SolverOptions {
  double tol = 1e-9;            // residual-norm target
  long max_matvecs = 200000;
  int krylov_dim = 64;
  int num_kept = 8;             // Ritz vectors carried across restarts
  std::uint64_t seed = 1;
};

/// Thrown when the iterative solver exhausts its matvec budget; carries the
/// best pair found so far.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double best_energy, double best_residual)
      : std::runtime_error(what), best_energy_(best_energy), best_residual_(best_residual) {}
  double best_energy() const { return best_energy_; }
  double best_residual() const { return best_residual_; }

 private:
  double best_energy_;
  double best_residual_;
};

/// Lowest eigenpair by thick-restart Lanczos with full reorthogonalization.
/// Deterministic for a fixed seed.
EigenResult lowest_eigenpair(const SparseOperator& op, const SolverOptions& options);
EigenResult lowest_eigenpair(const SparseOperator& op, double tol, long max_iter,
                             std::uint64_t seed);

/// Full symmetric eigendecomposition; test oracle and small-problem path.
EigenResult dense_lowest_eigenpair(const SparseOperator& op, Index max_dimension = 20000);

// Deterministic helpers, shared with tests.
std::uint64_t splitmix64(std::uint64_t& state);
Eigen::VectorXd random_unit_vector(Index size, std::uint64_t seed);
/// Flips the sign so the entry of largest magnitude is positive.
void fix_sign(Eigen::VectorXd& v);

}  // namespace polaron
