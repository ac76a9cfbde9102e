#include "polaron/vqe.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace polaron {

int qubits_for_segment(int segment_size, int phonon_levels) {
  const Index dim = basis_size(segment_size, phonon_levels);
  if (dim <= 1) return 0;
  return std::bit_width(static_cast<std::uint64_t>(dim - 1));
}

int qubits_for_full(int num_sites, int phonon_levels) {
  if (num_sites < 1 || phonon_levels < 1)
    throw std::invalid_argument("qubits_for_full: inputs must be >= 1");
  Index dim = num_sites;
  bool overflow = false;
  for (int i = 0; i < num_sites && !overflow; ++i)
    overflow = __builtin_mul_overflow(dim, static_cast<Index>(phonon_levels), &dim);
  if (!overflow) {
    if (dim <= 1) return 0;
    return std::bit_width(static_cast<std::uint64_t>(dim - 1));
  }
  const double bits = std::log2(static_cast<double>(num_sites)) +
                      static_cast<double>(num_sites) * std::log2(static_cast<double>(phonon_levels));
  return static_cast<int>(std::ceil(bits - 1e-9));
}

SparseOperator pad_to_qubits(const SparseOperator& op, int num_qubits,
                             std::optional<double> penalty) {
  if (num_qubits < 0 || num_qubits > 62)
    throw std::invalid_argument("pad_to_qubits: unsupported qubit count");
  const Index padded = Index(1) << num_qubits;
  const Index d = op.dimension();
  if (d > padded)
    throw std::invalid_argument("pad_to_qubits: operator does not fit in 2^n dimensions");
  if (d == padded) return SparseOperator{op.matrix};

  double pen;
  if (penalty) {
    pen = *penalty;
  } else {
    double upper = -std::numeric_limits<double>::infinity();
    double lower = std::numeric_limits<double>::infinity();
    for (int k = 0; k < op.matrix.outerSize(); ++k) {
      double diag = 0.0, off = 0.0;
      for (Eigen::SparseMatrix<double>::InnerIterator it(op.matrix, k); it; ++it) {
        if (it.row() == it.col())
          diag = it.value();
        else
          off += std::abs(it.value());
      }
      upper = std::max(upper, diag + off);
      lower = std::min(lower, diag - off);
    }
    if (d == 0) upper = lower = 0.0;
    pen = upper + (upper - lower) + 1.0;
  }

  std::vector<Eigen::Triplet<double, Index>> entries;
  entries.reserve(static_cast<std::size_t>(op.matrix.nonZeros()) + static_cast<std::size_t>(padded - d));
  for (int k = 0; k < op.matrix.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(op.matrix, k); it; ++it)
      entries.emplace_back(it.row(), it.col(), it.value());
  for (Index i = d; i < padded; ++i) entries.emplace_back(i, i, pen);
  return SparseOperator::from_triplets(padded, entries);
}

PauliExpansion pauli_decompose(const SparseOperator& op, int num_qubits, double drop_tol,
                               int max_qubits) {
  if (num_qubits < 0) throw std::invalid_argument("pauli_decompose: negative qubit count");
  if (num_qubits > max_qubits)
    throw std::invalid_argument("pauli_decompose: qubit count above the decomposition cap");
  const Index dim = Index(1) << num_qubits;
  if (op.dimension() != dim)
    throw std::invalid_argument("pauli_decompose: operator dimension must equal 2^n");

  Eigen::MatrixXd a(op.matrix);

  // One pass per qubit maps each 2x2 block (over that qubit's row/column bit)
  // to its I/X/Y/Z components, with the Y slot holding the real convention
  // (C - B)/2; a factor -i per Y letter is reinstated below.
  for (int b = 0; b < num_qubits; ++b) {
    const Index s = Index(1) << b;
    for (Index c = 0; c < dim; ++c) {
      if (c & s) continue;
      for (Index r = 0; r < dim; ++r) {
        if (r & s) continue;
        const double a00 = a(r, c);
        const double a01 = a(r, c + s);
        const double a10 = a(r + s, c);
        const double a11 = a(r + s, c + s);
        a(r, c) = 0.5 * (a00 + a11);
        a(r, c + s) = 0.5 * (a01 + a10);
        a(r + s, c) = 0.5 * (a10 - a01);
        a(r + s, c + s) = 0.5 * (a00 - a11);
      }
    }
  }

  PauliExpansion out;
  out.num_qubits = num_qubits;
  std::string word(static_cast<std::size_t>(std::max(num_qubits, 1)), 'I');
  for (Index r = 0; r < dim; ++r) {
    for (Index c = 0; c < dim; ++c) {
      const int y_count = std::popcount(static_cast<std::uint64_t>(r & ~c & (dim - 1)));
      if (y_count % 2 != 0) continue;  // vanishes for symmetric input
      const double value = a(r, c);
      const double coeff = (y_count % 4 == 2) ? -value : value;
      if (std::abs(coeff) <= drop_tol) continue;
      word.assign(static_cast<std::size_t>(num_qubits), 'I');
      for (int q = 0; q < num_qubits; ++q) {
        const int bit = num_qubits - 1 - q;
        const int rb = static_cast<int>((r >> bit) & 1);
        const int cb = static_cast<int>((c >> bit) & 1);
        word[static_cast<std::size_t>(q)] = "IXYZ"[rb * 2 + cb];
      }
      out.terms.push_back({coeff, word});
    }
  }
  return out;
}

Eigen::MatrixXd pauli_reconstruct(const PauliExpansion& expansion) {
  const int n = expansion.num_qubits;
  if (n < 0 || n > 12) throw std::invalid_argument("pauli_reconstruct: supports n <= 12");
  const Index dim = Index(1) << n;
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
  for (const auto& term : expansion.terms) {
    if (static_cast<int>(term.word.size()) != n)
      throw std::invalid_argument("pauli_reconstruct: word length mismatch");
    for (Index c = 0; c < dim; ++c) {
      Index r = 0;
      std::complex<double> f = 1.0;
      for (int q = 0; q < n; ++q) {
        const int bit = n - 1 - q;
        const int cb = static_cast<int>((c >> bit) & 1);
        int rb = cb;
        switch (term.word[static_cast<std::size_t>(q)]) {
          case 'I':
            break;
          case 'X':
            rb = 1 - cb;
            break;
          case 'Y':
            rb = 1 - cb;
            f *= cb == 0 ? std::complex<double>(0.0, 1.0) : std::complex<double>(0.0, -1.0);
            break;
          case 'Z':
            if (cb) f = -f;
            break;
          default:
            throw std::invalid_argument("pauli_reconstruct: invalid Pauli letter");
        }
        r |= static_cast<Index>(rb) << bit;
      }
      m(r, c) += term.coefficient * f;
    }
  }
  return m.real();
}

namespace {

void apply_ry(Eigen::VectorXd& v, int num_qubits, int qubit, double theta) {
  const Index dim = v.size();
  const Index mask = Index(1) << (num_qubits - 1 - qubit);
  const double c = std::cos(0.5 * theta);
  const double s = std::sin(0.5 * theta);
  for (Index i = 0; i < dim; ++i) {
    if (i & mask) continue;
    const Index i1 = i | mask;
    const double v0 = v[i];
    const double v1 = v[i1];
    v[i] = c * v0 - s * v1;
    v[i1] = s * v0 + c * v1;
  }
}

void apply_cnot_chain(Eigen::VectorXd& v, int num_qubits) {
  const Index dim = v.size();
  for (int q = 0; q + 1 < num_qubits; ++q) {
    const Index cmask = Index(1) << (num_qubits - 1 - q);
    const Index tmask = Index(1) << (num_qubits - 2 - q);
    for (Index i = 0; i < dim; ++i)
      if ((i & cmask) && !(i & tmask)) std::swap(v[i], v[i | tmask]);
  }
}

}  // namespace

Eigen::VectorXd ansatz_state(const AnsatzConfig& cfg) {
  if (cfg.num_qubits < 1 || cfg.num_qubits > 24)
    throw std::invalid_argument("ansatz_state: unsupported qubit count");
  if (cfg.depth < 0) throw std::invalid_argument("ansatz_state: depth must be >= 0");
  if (cfg.parameters.size() != cfg.parameter_count())
    throw std::invalid_argument("ansatz_state: parameter count mismatch");

  const Index dim = Index(1) << cfg.num_qubits;
  Eigen::VectorXd v = Eigen::VectorXd::Zero(dim);
  v[0] = 1.0;
  int k = 0;
  if (!cfg.final_layer_only) {
    for (int q = 0; q < cfg.num_qubits; ++q) apply_ry(v, cfg.num_qubits, q, cfg.parameters[k++]);
    for (int d = 0; d < cfg.depth; ++d) {
      apply_cnot_chain(v, cfg.num_qubits);
      for (int q = 0; q < cfg.num_qubits; ++q) apply_ry(v, cfg.num_qubits, q, cfg.parameters[k++]);
    }
  } else {
    for (int d = 0; d < cfg.depth; ++d) {
      for (int q = 0; q < cfg.num_qubits; ++q) apply_ry(v, cfg.num_qubits, q, cfg.parameters[k++]);
      apply_cnot_chain(v, cfg.num_qubits);
    }
  }
  return v;
}

double expectation(const SparseOperator& op, const Eigen::VectorXd& state) {
  if (op.dimension() != state.size())
    throw std::invalid_argument("expectation: dimension mismatch");
  return state.dot(op.apply(state));
}

double expectation(const PauliExpansion& expansion, const Eigen::VectorXd& state) {
  const Index dim = Index(1) << expansion.num_qubits;
  if (state.size() != dim) throw std::invalid_argument("expectation: dimension mismatch");
  double total = 0.0;
  for (const auto& term : expansion.terms) {
    Index flip = 0, sign_mask = 0;
    int y_count = 0;
    for (int q = 0; q < expansion.num_qubits; ++q) {
      const Index m = Index(1) << (expansion.num_qubits - 1 - q);
      switch (term.word[static_cast<std::size_t>(q)]) {
        case 'I':
          break;
        case 'X':
          flip |= m;
          break;
        case 'Y':
          flip |= m;
          sign_mask |= m;
          ++y_count;
          break;
        case 'Z':
          sign_mask |= m;
          break;
        default:
          throw std::invalid_argument("expectation: invalid Pauli letter");
      }
    }
    if (y_count % 2 != 0) continue;  // zero for real states
    const double pref = (y_count % 4 == 2) ? -1.0 : 1.0;
    double acc = 0.0;
    for (Index i = 0; i < dim; ++i) {
      const double s =
          (std::popcount(static_cast<std::uint64_t>(i & sign_mask)) & 1) ? -1.0 : 1.0;
      acc += s * state[i] * state[i ^ flip];
    }
    total += term.coefficient * pref * acc;
  }
  return total;
}

Eigen::VectorXd parameter_shift_gradient(const SparseOperator& op, const AnsatzConfig& at) {
  if (at.parameters.size() != at.parameter_count())
    throw std::invalid_argument("parameter_shift_gradient: parameter count mismatch");
  AnsatzConfig probe = at;
  Eigen::VectorXd grad(at.parameters.size());
  constexpr double half_pi = std::numbers::pi / 2.0;
  for (Eigen::Index i = 0; i < at.parameters.size(); ++i) {
    probe.parameters[i] = at.parameters[i] + half_pi;
    const double ep = expectation(op, ansatz_state(probe));
    probe.parameters[i] = at.parameters[i] - half_pi;
    const double em = expectation(op, ansatz_state(probe));
    probe.parameters[i] = at.parameters[i];
    grad[i] = 0.5 * (ep - em);
  }
  return grad;
}

namespace {

struct LocalMin {
  double f = std::numeric_limits<double>::infinity();
  Eigen::VectorXd x;
  long evaluations = 0;
};

template <class Fn>
void nelder_mead_once(Fn&& f, Eigen::VectorXd& x_best, double& f_best, double step,
                      long max_evals, double f_tol, double x_tol, long& evaluations) {
  const int n = static_cast<int>(x_best.size());
  std::vector<Eigen::VectorXd> xs(static_cast<std::size_t>(n) + 1, x_best);
  std::vector<double> fs(static_cast<std::size_t>(n) + 1);
  for (int i = 1; i <= n; ++i) xs[static_cast<std::size_t>(i)][i - 1] += step;
  fs[0] = f_best;
  for (int i = 1; i <= n; ++i) {
    fs[static_cast<std::size_t>(i)] = f(xs[static_cast<std::size_t>(i)]);
    ++evaluations;
  }
  std::vector<int> order(static_cast<std::size_t>(n) + 1);
  std::iota(order.begin(), order.end(), 0);
  auto sort_simplex = [&] {
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return fs[static_cast<std::size_t>(a)] < fs[static_cast<std::size_t>(b)];
    });
  };

  while (evaluations < max_evals) {
    sort_simplex();
    const int best = order.front();
    const int worst = order.back();
    const int second_worst = order[static_cast<std::size_t>(n - 1)];

    double diameter = 0.0;
    for (int i = 0; i <= n; ++i)
      diameter = std::max(
          diameter,
          (xs[static_cast<std::size_t>(i)] - xs[static_cast<std::size_t>(best)]).cwiseAbs().maxCoeff());
    if (fs[static_cast<std::size_t>(worst)] - fs[static_cast<std::size_t>(best)] <=
            f_tol * (1.0 + std::abs(fs[static_cast<std::size_t>(best)])) &&
        diameter <= x_tol)
      break;

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (int i = 0; i <= n; ++i)
      if (i != worst) centroid += xs[static_cast<std::size_t>(i)];
    centroid /= static_cast<double>(n);

    const Eigen::VectorXd xr = centroid + (centroid - xs[static_cast<std::size_t>(worst)]);
    const double fr = f(xr);
    ++evaluations;
    if (fr < fs[static_cast<std::size_t>(best)]) {
      const Eigen::VectorXd xe = centroid + 2.0 * (centroid - xs[static_cast<std::size_t>(worst)]);
      const double fe = f(xe);
      ++evaluations;
      if (fe < fr) {
        xs[static_cast<std::size_t>(worst)] = xe;
        fs[static_cast<std::size_t>(worst)] = fe;
      } else {
        xs[static_cast<std::size_t>(worst)] = xr;
        fs[static_cast<std::size_t>(worst)] = fr;
      }
    } else if (fr < fs[static_cast<std::size_t>(second_worst)]) {
      xs[static_cast<std::size_t>(worst)] = xr;
      fs[static_cast<std::size_t>(worst)] = fr;
    } else {
      const bool outside = fr < fs[static_cast<std::size_t>(worst)];
      const double side = outside ? 0.5 : -0.5;
      const Eigen::VectorXd xc =
          centroid + side * (centroid - xs[static_cast<std::size_t>(worst)]);
      const double fc = f(xc);
      ++evaluations;
      if (fc < std::min(fr, fs[static_cast<std::size_t>(worst)])) {
        xs[static_cast<std::size_t>(worst)] = xc;
        fs[static_cast<std::size_t>(worst)] = fc;
      } else {
        // shrink toward the best vertex
        for (int i = 0; i <= n; ++i) {
          if (i == best) continue;
          xs[static_cast<std::size_t>(i)] =
              xs[static_cast<std::size_t>(best)] +
              0.5 * (xs[static_cast<std::size_t>(i)] - xs[static_cast<std::size_t>(best)]);
          fs[static_cast<std::size_t>(i)] = f(xs[static_cast<std::size_t>(i)]);
          ++evaluations;
          if (evaluations >= max_evals) break;
        }
      }
    }
  }
  sort_simplex();
  f_best = fs[static_cast<std::size_t>(order.front())];
  x_best = xs[static_cast<std::size_t>(order.front())];
}

template <class Fn>
LocalMin nelder_mead(Fn&& f, const Eigen::VectorXd& x0, double step, long max_evals,
                     double f_tol, double x_tol) {
  LocalMin out;
  Eigen::VectorXd x = x0;
  double fx = f(x);
  ++out.evaluations;
  // Adaptive restarts within the budget: whenever the simplex collapses the
  // search resumes around the incumbent with a smaller initial edge.
  double edge = step;
  while (out.evaluations < max_evals && edge > 1e-10) {
    const double before = fx;
    nelder_mead_once(f, x, fx, edge, max_evals, f_tol, x_tol, out.evaluations);
    if (fx >= before - std::max(1e-12, f_tol * (1.0 + std::abs(before)))) edge *= 0.25;
  }
  out.f = fx;
  out.x = x;
  return out;
}

template <class Fn, class GradFn>
LocalMin shift_descent(Fn&& f, GradFn&& grad, const Eigen::VectorXd& x0, long max_evals,
                       double learning_rate) {
  LocalMin out;
  Eigen::VectorXd x = x0;
  double fx = f(x);
  ++out.evaluations;
  const long grad_cost = 2 * x.size();
  double eta = learning_rate;
  while (out.evaluations + grad_cost + 1 <= max_evals) {
    const Eigen::VectorXd g = grad(x);
    out.evaluations += grad_cost;
    if (g.norm() <= 1e-8) break;
    const Eigen::VectorXd trial = x - eta * g;
    const double ft = f(trial);
    ++out.evaluations;
    if (ft < fx) {
      x = trial;
      fx = ft;
      eta *= 1.2;
    } else {
      eta *= 0.5;
      if (eta < 1e-12) break;
    }
  }
  out.f = fx;
  out.x = x;
  return out;
}

}  // namespace

VqeOutcome vqe_minimize(const SparseOperator& op, const AnsatzConfig& shape,
                        const OptimizerConfig& optimizer, std::uint64_t seed) {
  const Index dim = Index(1) << shape.num_qubits;
  if (op.dimension() != dim)
    throw std::invalid_argument("vqe_minimize: operator dimension must equal 2^n");
  if (optimizer.restarts < 1) throw std::invalid_argument("vqe_minimize: restarts must be >= 1");

  AnsatzConfig work = shape;
  const int k = shape.parameter_count();
  auto objective = [&](const Eigen::VectorXd& theta) {
    work.parameters = theta;
    return expectation(op, ansatz_state(work));
  };

  VqeOutcome best;
  best.energy = std::numeric_limits<double>::infinity();
  if (k == 0) {
    work.parameters = Eigen::VectorXd();
    best.energy = expectation(op, ansatz_state(work));
    best.parameters = Eigen::VectorXd();
    best.evaluations = 1;
    best.restarts_used = 1;
    return best;
  }

  for (int r = 0; r < optimizer.restarts; ++r) {
    std::uint64_t rng = seed + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(r + 1);
    Eigen::VectorXd x0(k);
    for (int i = 0; i < k; ++i)
      x0[i] = (2.0 * static_cast<double>(splitmix64(rng) >> 11) * 0x1.0p-53 - 1.0) *
              std::numbers::pi;
    LocalMin local;
    if (optimizer.method == OptimizerConfig::Method::nelder_mead) {
      local = nelder_mead(objective, x0, optimizer.initial_step, optimizer.max_evaluations,
                          optimizer.f_tol, optimizer.x_tol);
    } else {
      auto grad = [&](const Eigen::VectorXd& theta) {
        work.parameters = theta;
        return parameter_shift_gradient(op, work);
      };
      local = shift_descent(objective, grad, x0, optimizer.max_evaluations,
                            optimizer.learning_rate);
    }
    best.evaluations += local.evaluations;
    ++best.restarts_used;
    if (local.f < best.energy) {
      best.energy = local.f;
      best.parameters = local.x;
    }
  }
  return best;
}

EcRun ec_vqe_ground_energy(const LatticeSpec& lattice, int segment_size, bool include_overlaps,
                           const VqeEcConfig& config, std::uint64_t seed) {
  lattice.validate();
  const auto segments = generate_segments(lattice.num_sites, segment_size, include_overlaps);
  const SparseOperator h_seg =
      build_segment_hamiltonian(lattice, SegmentSpec::window(0, segment_size));
  const int n = qubits_for_segment(segment_size, lattice.phonon_levels);
  const SparseOperator padded = pad_to_qubits(h_seg, n, config.pad_penalty);

  AnsatzConfig shape;
  shape.num_qubits = std::max(n, 1);
  shape.depth = config.depth;
  shape.final_layer_only = config.final_layer_only;
  const VqeOutcome vqe = vqe_minimize(padded, shape, config.optimizer, seed);

  AnsatzConfig best = shape;
  best.parameters = vqe.parameters;
  const Eigen::VectorXd psi = ansatz_state(best);
  const Index dk = h_seg.dimension();
  Eigen::VectorXd head = psi.head(dk);
  const double leakage = psi.size() > dk ? psi.tail(psi.size() - dk).norm() : 0.0;
  const double head_norm = head.norm();
  if (!(head_norm > 1e-8))
    throw std::runtime_error("ec_vqe_ground_energy: optimized state has no weight on the physical block");
  head /= head_norm;

  EcRun run = stitch_training_state(lattice, segments, head, config.s_cutoff);
  run.diagnostics.segment_dimension = dk;
  run.diagnostics.segment_energy = head.dot(h_seg.apply(head));
  run.diagnostics.segment_residual =
      (h_seg.apply(head) - run.diagnostics.segment_energy * head).norm();
  run.diagnostics.num_qubits = n;
  run.diagnostics.vqe_energy = vqe.energy;
  run.diagnostics.vqe_leakage = leakage;
  run.diagnostics.vqe_evaluations = vqe.evaluations;
  run.diagnostics.vqe_restarts = vqe.restarts_used;
  return run;
}

}  // namespace polaron
