#include "polaron/segment_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace polaron {

std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace {

double unit_double(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;  // [0, 1)
}

Eigen::VectorXd raw_random_vector(Index size, std::uint64_t& state) {
  Eigen::VectorXd v(size);
  for (Index i = 0; i < size; ++i) v[i] = 2.0 * unit_double(splitmix64(state)) - 1.0;
  return v;
}

/// Random direction orthonormal to the columns of V; empty if the complement
/// is (numerically) exhausted.
Eigen::VectorXd orthonormal_random(const Eigen::Ref<const Eigen::MatrixXd>& V,
                                   std::uint64_t& state) {
  for (int attempt = 0; attempt < 32; ++attempt) {
    Eigen::VectorXd r = raw_random_vector(V.rows(), state);
    r.normalize();
    r -= V * (V.transpose() * r);
    r -= V * (V.transpose() * r);
    const double n = r.norm();
    if (n > 1e-6) return r / n;
  }
  return Eigen::VectorXd();
}

}  // namespace

Eigen::VectorXd random_unit_vector(Index size, std::uint64_t seed) {
  std::uint64_t state = seed;
  Eigen::VectorXd v = raw_random_vector(size, state);
  while (v.norm() == 0.0) v = raw_random_vector(size, state);
  v.normalize();
  return v;
}

void fix_sign(Eigen::VectorXd& v) {
  Index imax = 0;
  double vmax = 0.0;
  for (Index i = 0; i < v.size(); ++i) {
    const double a = std::abs(v[i]);
    if (a > vmax) {
      vmax = a;
      imax = i;
    }
  }
  if (v.size() > 0 && v[imax] < 0.0) v = -v;
}

EigenResult lowest_eigenpair(const SparseOperator& op, const SolverOptions& opt) {
  const Index d = op.dimension();
  if (d == 0) throw std::invalid_argument("lowest_eigenpair: operator has dimension 0");
  if (!(opt.tol > 0.0)) throw std::invalid_argument("lowest_eigenpair: tol must be > 0");
  if (d == 1) {
    Eigen::VectorXd v(1);
    v[0] = 1.0;
    return {op.coeff(0, 0), v, 0.0};
  }

  const int m = static_cast<int>(std::min<Index>(std::max(2, opt.krylov_dim), d));
  const int kept = std::clamp(opt.num_kept, 1, m - 1);

  std::uint64_t rng = opt.seed;
  Eigen::MatrixXd V(d, m);
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(m, m);
  int j = 0;  // current basis size
  long matvecs = 0;

  Eigen::VectorXd r = raw_random_vector(d, rng);
  while (r.norm() == 0.0) r = raw_random_vector(d, rng);
  r.normalize();

  double best_energy = std::numeric_limits<double>::infinity();
  double best_residual = std::numeric_limits<double>::infinity();

  while (true) {
    // Grow the Krylov basis with full reorthogonalization (two CGS passes);
    // the projected matrix VᵀHV is filled column by column, which also
    // handles the arrowhead structure after a thick restart.
    bool exhausted = false;
    while (j < m && matvecs < opt.max_matvecs && !exhausted) {
      V.col(j) = r;
      Eigen::VectorXd w = op.apply(V.col(j));
      ++matvecs;
      const double wnorm0 = w.norm();
      Eigen::VectorXd h = V.leftCols(j + 1).transpose() * w;
      M.block(0, j, j + 1, 1) = h;
      M.block(j, 0, 1, j + 1) = h.transpose();
      w.noalias() -= V.leftCols(j + 1) * h;
      Eigen::VectorXd h2 = V.leftCols(j + 1).transpose() * w;
      w.noalias() -= V.leftCols(j + 1) * h2;
      ++j;
      if (j >= static_cast<int>(d)) {
        exhausted = true;
        break;
      }
      const double beta = w.norm();
      if (beta > 1e-12 * std::max(1.0, wnorm0)) {
        r = w / beta;
      } else {
        // Invariant subspace hit; continue in a fresh random direction.
        r = orthonormal_random(V.leftCols(j), rng);
        if (r.size() == 0) exhausted = true;
      }
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(M.topLeftCorner(j, j));
    const double theta = eig.eigenvalues()(0);
    Eigen::VectorXd x = V.leftCols(j) * eig.eigenvectors().col(0);
    x.normalize();
    Eigen::VectorXd hx = op.apply(x);
    ++matvecs;
    const double residual = (hx - theta * x).norm();
    if (residual < best_residual) {
      best_residual = residual;
      best_energy = theta;
    }
    if (residual <= opt.tol) {
      fix_sign(x);
      return {theta, std::move(x), residual};
    }
    if (matvecs >= opt.max_matvecs || exhausted)
      throw ConvergenceError("lowest_eigenpair: no convergence within the matvec budget (best residual " +
                                 std::to_string(best_residual) + ")",
                             best_energy, best_residual);

    // Thick restart: keep the lowest Ritz pairs, continue from the leftover
    // Lanczos direction (still orthogonal to the kept span).
    const int l = std::min(kept, j - 1);
    const Eigen::MatrixXd S = eig.eigenvectors().leftCols(l);
    const Eigen::MatrixXd Mproj = S.transpose() * M.topLeftCorner(j, j) * S;
    Eigen::MatrixXd Vnew = V.leftCols(j) * S;
    V.leftCols(l) = Vnew;
    M.setZero();
    M.topLeftCorner(l, l) = Mproj;
    j = l;
    r -= V.leftCols(j) * (V.leftCols(j).transpose() * r);
    const double rn = r.norm();
    if (rn > 1e-8) {
      r /= rn;
    } else {
      r = orthonormal_random(V.leftCols(j), rng);
      if (r.size() == 0)
        throw ConvergenceError("lowest_eigenpair: search space exhausted before reaching tol",
                               best_energy, best_residual);
    }
  }
}

EigenResult lowest_eigenpair(const SparseOperator& op, double tol, long max_iter,
                             std::uint64_t seed) {
  SolverOptions opt;
  opt.tol = tol;
  opt.max_matvecs = max_iter;
  opt.seed = seed;
  return lowest_eigenpair(op, opt);
}

EigenResult dense_lowest_eigenpair(const SparseOperator& op, Index max_dimension) {
  const Index d = op.dimension();
  if (d == 0) throw std::invalid_argument("dense_lowest_eigenpair: operator has dimension 0");
  if (d > max_dimension)
    throw std::invalid_argument("dense_lowest_eigenpair: dimension above the dense cap");
  Eigen::MatrixXd dense(op.matrix);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(dense);
  if (eig.info() != Eigen::Success)
    throw std::runtime_error("dense_lowest_eigenpair: eigendecomposition failed");
  EigenResult out;
  out.energy = eig.eigenvalues()(0);
  out.vector = eig.eigenvectors().col(0);
  out.vector.normalize();
  out.residual_norm = (op.apply(out.vector) - out.energy * out.vector).norm();
  fix_sign(out.vector);
  return out;
}

}  // namespace polaron
