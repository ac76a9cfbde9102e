// Acceptance suite: one line per criterion, nonzero exit when any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <string>
#include <vector>

#include "polaron/oracle.hpp"
#include "polaron/run.hpp"
#include "polaron/segment_solver.hpp"
#include "polaron/stitching.hpp"
#include "polaron/vqe.hpp"

using namespace polaron;

namespace {

int failures = 0;

void report(int id, bool pass, const std::string& detail) {
  std::printf("%s criterion %d: %s\n", pass ? "PASS" : "FAIL", id, detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

LatticeSpec lattice_for(int ns, int np, double omega, double lambda) {
  LatticeSpec lat;
  lat.num_sites = ns;
  lat.phonon_levels = np;
  lat.phonon_frequency = omega;
  lat.coupling = g_for_lambda(lambda, 1.0, omega);
  return lat;
}

double uniform(std::uint64_t& rng) {
  return static_cast<double>(splitmix64(rng) >> 11) * 0x1.0p-53;
}

// 1. Strong-coupling convergence: N_s=100, omega=0.5, lambda=4, N_k=2 with
//    overlaps, N_p swept up to 38; converged energy within 2% of the
//    analytic strong-coupling value and segment dimension 2888 at N_p=38.
void criterion_1() {
  const double reference = strong_coupling_energy(0.0, 1.0, 0.5, 4.0);
  double final_energy = 0.0;
  Index final_dk = 0;
  std::vector<double> energies;
  for (int np = 2; np <= 38; np += 4) {
    const auto lat = lattice_for(100, np, 0.5, 4.0);
    const auto run = ec_ground_energy(lat, 2, true);
    energies.push_back(run.result.energy);
    final_energy = run.result.energy;
    final_dk = run.diagnostics.segment_dimension;
  }
  const double rel = std::abs(final_energy - reference) / std::abs(reference);
  const bool pass = rel <= 0.02 && final_dk == 2888;
  char detail[256];
  std::snprintf(detail, sizeof(detail),
                "EC energy %.8f vs %.8f (rel err %.4f%%, tol 2%%), d_k %lld (want 2888), %zu-point N_p sweep",
                final_energy, reference, 100.0 * rel, static_cast<long long>(final_dk),
                energies.size());
  report(1, pass, detail);
}

// 2. EC-VQE strong coupling at N_p=32 (11 qubits), default optimizer budget,
//    within 5% of the analytic value.
void criterion_2() {
  const double reference = strong_coupling_energy(0.0, 1.0, 0.5, 4.0);
  const auto lat = lattice_for(100, 32, 0.5, 4.0);
  VqeEcConfig cfg;
  cfg.depth = 2;
  cfg.final_layer_only = true;  // 22 rotation angles
  const auto run = ec_vqe_ground_energy(lat, 2, true, cfg, 12345);
  const double rel = std::abs(run.result.energy - reference) / std::abs(reference);
  const bool pass = rel <= 0.05 && run.diagnostics.num_qubits == 11 &&
                    run.diagnostics.vqe_leakage < 1e-3;
  char detail[256];
  std::snprintf(detail, sizeof(detail),
                "EC-VQE energy %.8f vs %.8f (rel err %.4f%%, tol 5%%), %d qubits, leakage %.2e",
                run.result.energy, reference, 100.0 * rel, run.diagnostics.num_qubits,
                run.diagnostics.vqe_leakage);
  report(2, pass, detail);
}

// 3. Qubit accounting.
void criterion_3() {
  const int seg = qubits_for_segment(2, 32);
  const int full = qubits_for_full(100, 32);
  char detail[128];
  std::snprintf(detail, sizeof(detail), "qubits_for_segment(2,32)=%d (want 11), qubits_for_full(100,32)=%d (want 507)",
                seg, full);
  report(3, seg == 11 && full == 507, detail);
}

// 4. Oracle sandwich across the test grid.
void criterion_4() {
  int checked = 0;
  int violations = 0;
  std::string first_violation;
  for (int ns = 2; ns <= 6; ++ns) {
    for (int np : {2, 3, 4}) {
      if (basis_size(ns, np) > 100000) continue;
      for (double lambda : {0.25, 1.0, 2.0}) {
        for (double omega : {0.1, 0.5}) {
          const auto lat = lattice_for(ns, np, omega, lambda);
          const auto exact = oracle::exact_ground(lat);
          const auto ec = ec_ground_energy(lat, 2, true);
          VqeEcConfig vqe_cfg;
          vqe_cfg.depth = 1;
          vqe_cfg.final_layer_only = true;  // the 11-angle p=1 circuit
          vqe_cfg.optimizer.restarts = 4;
          vqe_cfg.optimizer.max_evaluations = 4000;
          const auto vqe = ec_vqe_ground_energy(lat, 2, true, vqe_cfg, 12345);
          ++checked;
          const bool ok = exact.energy - 1e-9 <= ec.result.energy &&
                          ec.result.energy <= vqe.result.energy + 1e-8 &&
                          ec.result.energy <= ec.diagnostics.h_eff_min_diagonal + 1e-10 &&
                          vqe.result.energy <= vqe.diagnostics.h_eff_min_diagonal + 1e-10;
          if (!ok) {
            ++violations;
            if (first_violation.empty()) {
              char buf[256];
              std::snprintf(buf, sizeof(buf),
                            "ns=%d np=%d lambda=%.2f omega=%.1f: exact %.9f ec %.9f vqe %.9f",
                            ns, np, lambda, omega, exact.energy, ec.result.energy,
                            vqe.result.energy);
              first_violation = buf;
            }
          }
        }
      }
    }
  }
  char detail[384];
  if (violations == 0)
    std::snprintf(detail, sizeof(detail),
                  "E_exact - 1e-9 <= E_EC <= E_EC-VQE + 1e-8 and Rayleigh dominance on all %d grid points",
                  checked);
  else
    std::snprintf(detail, sizeof(detail), "%d of %d grid points violated the sandwich; first: %s",
                  violations, checked, first_violation.c_str());
  report(4, violations == 0, detail);
}

// 5. Contraction correctness on 200 randomized segment pairs.
void criterion_5() {
  std::uint64_t rng = 20260811;
  int checked = 0;
  double worst_overlap = 0.0;
  double worst_cross = 0.0;
  while (checked < 200) {
    const int ns = 3 + static_cast<int>(splitmix64(rng) % 4);
    const int np = 2 + static_cast<int>(splitmix64(rng) % 3);
    const double omega = (splitmix64(rng) % 2) ? 0.5 : 0.1;
    const double lambda = 0.25 + 1.75 * uniform(rng);
    const auto lat = lattice_for(ns, np, omega, lambda);
    if (basis_size(ns, np) > 100000) continue;
    const int size_a = 1 + static_cast<int>(splitmix64(rng) % 3);
    const int size_b = 1 + static_cast<int>(splitmix64(rng) % 3);
    if (size_a > ns || size_b > ns) continue;
    const int start_a = static_cast<int>(splitmix64(rng) % static_cast<std::uint64_t>(ns - size_a + 1));
    const int start_b = static_cast<int>(splitmix64(rng) % static_cast<std::uint64_t>(ns - size_b + 1));
    const auto a = make_segment_state(
        SegmentSpec::window(start_a, size_a), np,
        random_unit_vector(basis_size(size_a, np), splitmix64(rng)));
    const auto b = make_segment_state(
        SegmentSpec::window(start_b, size_b), np,
        random_unit_vector(basis_size(size_b, np), splitmix64(rng)));
    const auto ea = oracle::embed(a, lat);
    const auto eb = oracle::embed(b, lat);
    const auto h = oracle::full_hamiltonian(lat);
    worst_overlap = std::max(worst_overlap,
                             std::abs(overlap(a, b) - ea.amplitudes.dot(eb.amplitudes)));
    worst_cross = std::max(worst_cross, std::abs(cross_matrix_element(a, b, lat) -
                                                 ea.amplitudes.dot(h.apply(eb.amplitudes))));
    ++checked;
  }
  char detail[192];
  std::snprintf(detail, sizeof(detail),
                "200 random pairs: max |overlap error| %.2e, max |H element error| %.2e (tol 1e-10)",
                worst_overlap, worst_cross);
  report(5, worst_overlap <= 1e-10 && worst_cross <= 1e-10, detail);
}

// 6. Pauli and ansatz suite.
void criterion_6() {
  std::uint64_t rng = 613;
  bool pass = true;
  std::string detail;

  double worst_rebuild = 0.0;
  for (int n = 1; n <= 8; ++n) {
    const Index dim = Index(1) << n;
    std::vector<Eigen::Triplet<double, Index>> entries;
    for (Index i = 0; i < dim; ++i)
      for (Index j = i; j < dim; ++j) {
        const double v = 2.0 * uniform(rng) - 1.0;
        entries.emplace_back(i, j, v);
        if (i != j) entries.emplace_back(j, i, v);
      }
    const auto op = SparseOperator::from_triplets(dim, entries);
    const auto expansion = pauli_decompose(op, n);
    const Eigen::MatrixXd rebuilt = pauli_reconstruct(expansion);
    worst_rebuild =
        std::max(worst_rebuild, (rebuilt - Eigen::MatrixXd(op.matrix)).cwiseAbs().maxCoeff());
  }
  pass = pass && worst_rebuild <= 1e-12;

  double worst_norm = 0.0;
  AnsatzConfig cfg;
  cfg.num_qubits = 5;
  cfg.depth = 2;
  for (int draw = 0; draw < 1000; ++draw) {
    cfg.parameters.resize(cfg.parameter_count());
    for (int i = 0; i < cfg.parameters.size(); ++i)
      cfg.parameters[i] = (2.0 * uniform(rng) - 1.0) * std::numbers::pi;
    worst_norm = std::max(worst_norm, std::abs(ansatz_state(cfg).norm() - 1.0));
  }
  pass = pass && worst_norm <= 1e-12;

  const auto lat = lattice_for(2, 3, 0.5, 1.0);
  const auto padded = pad_to_qubits(build_segment_hamiltonian(lat, SegmentSpec::window(0, 2)), 5);
  const auto expansion = pauli_decompose(padded, 5);
  double worst_expectation = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const auto v = random_unit_vector(32, splitmix64(rng));
    worst_expectation =
        std::max(worst_expectation, std::abs(expectation(padded, v) - expectation(expansion, v)));
  }
  pass = pass && worst_expectation <= 1e-10;

  double worst_grad = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    cfg.parameters.resize(cfg.parameter_count());
    for (int i = 0; i < cfg.parameters.size(); ++i)
      cfg.parameters[i] = (2.0 * uniform(rng) - 1.0) * std::numbers::pi;
    const Eigen::VectorXd grad = parameter_shift_gradient(padded, cfg);
    AnsatzConfig probe = cfg;
    const double h = 1e-5;
    for (int i = 0; i < cfg.parameters.size(); ++i) {
      probe.parameters[i] = cfg.parameters[i] + h;
      const double ep = expectation(padded, ansatz_state(probe));
      probe.parameters[i] = cfg.parameters[i] - h;
      const double em = expectation(padded, ansatz_state(probe));
      probe.parameters[i] = cfg.parameters[i];
      const double fd = (ep - em) / (2.0 * h);
      worst_grad = std::max(worst_grad, std::abs(grad[i] - fd) /
                                            std::max({std::abs(fd), std::abs(grad[i]), 1e-8}));
    }
  }
  pass = pass && worst_grad <= 1e-4;

  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "rebuild %.2e (1e-12), norm drift %.2e (1e-12), path gap %.2e (1e-10), gradient %.2e (1e-4)",
                worst_rebuild, worst_norm, worst_expectation, worst_grad);
  report(6, pass, buf);
}

// 7. Decomposition geometry.
void criterion_7() {
  const auto windows = generate_segments(4, 2, true);
  const bool windows_ok = windows.size() == 3 && windows[0] == SegmentSpec::window(0, 2) &&
                          windows[1] == SegmentSpec::window(1, 2) &&
                          windows[2] == SegmentSpec::window(2, 2);
  const auto tiles = generate_segments(100, 2, false);
  char detail[160];
  std::snprintf(detail, sizeof(detail),
                "windows(4,2,overlaps) = {(0,1),(1,2),(2,3)} [%s], tiles(100,2) = %zu (want 50)",
                windows_ok ? "ok" : "wrong", tiles.size());
  report(7, windows_ok && tiles.size() == 50, detail);
}

// 8. Two- vs four-site crossover at weak coupling; energies pinned from the
//    first oracle run (N_s=8, N_p=3, omega=0.1).
void criterion_8() {
  struct Pin {
    double lambda, ec2, ec4;
  };
  const Pin pins[] = {{0.25, -1.647497047720, -1.930124534961},
                      {0.50, -1.706417661925, -2.023856064743}};
  bool pass = true;
  std::string parts;
  for (const Pin& pin : pins) {
    const auto lat = lattice_for(8, 3, 0.1, pin.lambda);
    const auto ec2 = ec_ground_energy(lat, 2, true);
    const auto ec4 = ec_ground_energy(lat, 4, true);
    const auto exact = oracle::exact_ground(lat);
    const bool ok = ec4.result.energy < ec2.result.energy &&
                    ec2.result.energy >= exact.energy - 1e-9 &&
                    ec4.result.energy >= exact.energy - 1e-9 &&
                    std::abs(ec2.result.energy - pin.ec2) <= 1e-6 &&
                    std::abs(ec4.result.energy - pin.ec4) <= 1e-6;
    pass = pass && ok;
    char buf[160];
    std::snprintf(buf, sizeof(buf), "[lambda=%.2f: EC2 %.6f, EC4 %.6f, exact %.6f] ", pin.lambda,
                  ec2.result.energy, ec4.result.energy, exact.energy);
    parts += buf;
  }
  report(8, pass, "four-site stitching wins at weak coupling " + parts);
}

}  // namespace

int main() {
  const auto start = std::chrono::steady_clock::now();
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::printf("%d of 8 criteria passed in %.1f s\n", 8 - failures, elapsed);
  return failures == 0 ? 0 : 1;
}
