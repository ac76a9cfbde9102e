#include <doctest.h>

#include <cmath>
#include <numbers>

#include "polaron/oracle.hpp"
#include "polaron/stitching.hpp"

using namespace polaron;

namespace {

LatticeSpec lattice_for(int ns, int np, double omega, double lambda) {
  LatticeSpec lat;
  lat.num_sites = ns;
  lat.phonon_levels = np;
  lat.phonon_frequency = omega;
  lat.coupling = g_for_lambda(lambda, 1.0, omega);
  return lat;
}

SegmentState random_state(const SegmentSpec& seg, int np, std::uint64_t seed) {
  const BasisConfig basis(seg.size(), np);
  return make_segment_state(seg, np, random_unit_vector(basis.dimension(), seed));
}

SegmentState ground_state(const LatticeSpec& lat, const SegmentSpec& seg) {
  const auto h = build_segment_hamiltonian(lat, seg);
  return make_segment_state(seg, lat.phonon_levels, lowest_eigenpair(h, {}).vector);
}

double dense_overlap(const SegmentState& a, const SegmentState& b, const LatticeSpec& lat) {
  return oracle::embed(a, lat).amplitudes.dot(oracle::embed(b, lat).amplitudes);
}

double dense_cross(const SegmentState& a, const SegmentState& b, const LatticeSpec& lat) {
  const auto h = oracle::full_hamiltonian(lat);
  return oracle::embed(a, lat).amplitudes.dot(h.apply(oracle::embed(b, lat).amplitudes));
}

}  // namespace

TEST_CASE("generate_segments geometry") {
  const auto w = generate_segments(4, 2, true);
  REQUIRE(w.size() == 3);
  CHECK(w[0] == SegmentSpec::window(0, 2));
  CHECK(w[1] == SegmentSpec::window(1, 2));
  CHECK(w[2] == SegmentSpec::window(2, 2));

  CHECK(generate_segments(100, 2, false).size() == 50);
  CHECK(generate_segments(100, 2, true).size() == 99);
  CHECK(generate_segments(2, 2, true).size() == 1);
  CHECK(generate_segments(6, 3, true).size() == 4);
  CHECK_THROWS_AS(generate_segments(5, 2, false), std::invalid_argument);
  CHECK_THROWS_AS(generate_segments(3, 4, true), std::invalid_argument);
}

TEST_CASE("overlap basics") {
  const auto lat = lattice_for(4, 3, 0.5, 1.0);
  const auto a = random_state(SegmentSpec::window(0, 2), 3, 11);
  CHECK(overlap(a, a) == doctest::Approx(1.0).epsilon(1e-12));

  const auto b = random_state(SegmentSpec::window(2, 2), 3, 12);
  CHECK(overlap(a, b) == 0.0);  // disjoint particle supports

  const auto c = random_state(SegmentSpec::window(1, 2), 3, 13);
  CHECK(overlap(a, c) == doctest::Approx(dense_overlap(a, c, lat)).epsilon(1e-12));

  const auto wrong_np = random_state(SegmentSpec::window(1, 2), 2, 14);
  CHECK_THROWS_AS(overlap(a, wrong_np), std::invalid_argument);
}

TEST_CASE("cross_matrix_element against the dense embedding") {
  const auto lat = lattice_for(4, 3, 0.5, 1.0);

  // whole-lattice segment: Rayleigh quotient of the exact ground state
  const auto whole = ground_state(lat, SegmentSpec::window(0, 4));
  const auto exact = oracle::exact_ground(lat);
  CHECK(cross_matrix_element(whole, whole, lat) == doctest::Approx(exact.energy).epsilon(1e-9));

  // disjoint, non-adjacent segments see no connecting bond
  const auto lat5 = lattice_for(5, 2, 0.5, 0.5);
  const auto a5 = random_state(SegmentSpec::window(0, 2), 2, 21);
  const auto b5 = random_state(SegmentSpec::window(3, 2), 2, 22);
  CHECK(cross_matrix_element(a5, b5, lat5) == 0.0);

  // overlapping ground states match the embedded dense value
  const auto v01 = ground_state(lat, SegmentSpec::window(0, 2));
  const auto v12 = ground_state(lat, SegmentSpec::window(1, 2));
  CHECK(cross_matrix_element(v01, v12, lat) ==
        doctest::Approx(dense_cross(v01, v12, lat)).epsilon(1e-10));

  // adjacent disjoint segments couple through the boundary bond only
  const auto v23 = ground_state(lat, SegmentSpec::window(2, 2));
  CHECK(cross_matrix_element(v01, v23, lat) ==
        doctest::Approx(dense_cross(v01, v23, lat)).epsilon(1e-10));
}

TEST_CASE("random segment pairs agree with the dense oracle") {
  std::uint64_t rng = 5150;
  for (int trial = 0; trial < 40; ++trial) {
    const int ns = 3 + static_cast<int>(splitmix64(rng) % 3);
    const int np = 2 + static_cast<int>(splitmix64(rng) % 2);
    const double omega = (splitmix64(rng) % 2) ? 0.5 : 0.1;
    const double lambda = 0.25 + static_cast<double>(splitmix64(rng) % 8) / 4.0;
    const auto lat = lattice_for(ns, np, omega, lambda);
    const int size_a = 1 + static_cast<int>(splitmix64(rng) % 3);
    const int size_b = 1 + static_cast<int>(splitmix64(rng) % 3);
    if (size_a > ns || size_b > ns) continue;
    const int start_a = static_cast<int>(splitmix64(rng) % static_cast<std::uint64_t>(ns - size_a + 1));
    const int start_b = static_cast<int>(splitmix64(rng) % static_cast<std::uint64_t>(ns - size_b + 1));
    const auto a = random_state(SegmentSpec::window(start_a, size_a), np, splitmix64(rng));
    const auto b = random_state(SegmentSpec::window(start_b, size_b), np, splitmix64(rng));
    CHECK(overlap(a, b) == doctest::Approx(dense_overlap(a, b, lat)).epsilon(1e-12));
    CHECK(cross_matrix_element(a, b, lat) ==
          doctest::Approx(dense_cross(a, b, lat)).epsilon(1e-10));
  }
}

TEST_CASE("build_effective_problem") {
  const auto lat = lattice_for(4, 3, 0.5, 1.0);

  SUBCASE("single state gives the 1x1 Rayleigh quotient") {
    const auto v = ground_state(lat, SegmentSpec::window(0, 2));
    const auto problem = build_effective_problem({v}, lat);
    CHECK(problem.s(0, 0) == 1.0);
    CHECK(problem.h_eff(0, 0) == doctest::Approx(cross_matrix_element(v, v, lat)).epsilon(1e-12));
  }

  SUBCASE("duplicated state collapses to rank one") {
    const auto v = ground_state(lat, SegmentSpec::window(1, 2));
    const auto problem = build_effective_problem({v, v}, lat);
    CHECK(problem.s(0, 1) == doctest::Approx(1.0).epsilon(1e-12));
    const auto res = solve_generalized(problem);
    CHECK(res.retained_modes == 1);
    const auto single = solve_generalized(build_effective_problem({v}, lat));
    CHECK(res.energy == doctest::Approx(single.energy).epsilon(1e-10));
  }

  SUBCASE("entries match the dense oracle") {
    std::vector<SegmentState> states;
    for (const auto& seg : generate_segments(4, 2, true)) states.push_back(ground_state(lat, seg));
    const auto problem = build_effective_problem(states, lat);
    const auto h_full = oracle::full_hamiltonian(lat);
    for (std::size_t i = 0; i < states.size(); ++i) {
      for (std::size_t j = 0; j < states.size(); ++j) {
        const auto vi = oracle::embed(states[i], lat).amplitudes;
        const auto vj = oracle::embed(states[j], lat).amplitudes;
        CHECK(problem.s(i, j) == doctest::Approx(vi.dot(vj)).epsilon(1e-10));
        CHECK(problem.h_eff(i, j) == doctest::Approx(vi.dot(h_full.apply(vj))).epsilon(1e-10));
      }
    }
  }

  SUBCASE("unnormalized states are rejected") {
    auto v = ground_state(lat, SegmentSpec::window(0, 2));
    v.amplitudes *= 1.5;
    CHECK_THROWS_AS(build_effective_problem({v}, lat), std::invalid_argument);
  }
}

TEST_CASE("solve_generalized") {
  SUBCASE("k = 1") {
    EffectiveProblem p;
    p.h_eff = Eigen::MatrixXd::Constant(1, 1, -2.5);
    p.s = Eigen::MatrixXd::Identity(1, 1);
    const auto res = solve_generalized(p);
    CHECK(res.energy == doctest::Approx(-2.5));
    CHECK(res.retained_modes == 1);
  }
  SUBCASE("degenerate training set is an error") {
    EffectiveProblem p;
    p.h_eff = Eigen::MatrixXd::Zero(2, 2);
    p.s = Eigen::MatrixXd::Zero(2, 2);
    CHECK_THROWS_AS(solve_generalized(p), std::runtime_error);
  }
  SUBCASE("coefficients satisfy the S-normalization") {
    const auto lat = lattice_for(4, 2, 0.5, 0.5);
    std::vector<SegmentState> states;
    for (const auto& seg : generate_segments(4, 2, true)) states.push_back(ground_state(lat, seg));
    const auto problem = build_effective_problem(states, lat);
    const auto res = solve_generalized(problem);
    CHECK(res.coefficients.dot(problem.s * res.coefficients) == doctest::Approx(1.0).epsilon(1e-8));
  }
}

TEST_CASE("ec_ground_energy equals the exact energy when the segment is the lattice") {
  const auto lat = lattice_for(2, 4, 0.5, 1.0);
  const auto run = ec_ground_energy(lat, 2, true);
  const auto exact = oracle::exact_ground(lat);
  CHECK(run.result.energy == doctest::Approx(exact.energy).epsilon(1e-9));
  CHECK(run.diagnostics.num_segments == 1);
}

TEST_CASE("variational bound and Rayleigh dominance on small lattices") {
  for (double lambda : {0.25, 1.0}) {
    const auto lat = lattice_for(5, 3, 0.5, lambda);
    const auto exact = oracle::exact_ground(lat);
    const auto run = ec_ground_energy(lat, 2, true);
    CHECK(run.result.energy >= exact.energy - 1e-9);
    CHECK(run.result.energy <= run.diagnostics.h_eff_min_diagonal + 1e-10);
  }
}

TEST_CASE("appending a training vector never raises the EC energy") {
  const auto lat = lattice_for(4, 2, 0.5, 1.0);
  std::vector<SegmentState> states = {ground_state(lat, SegmentSpec::window(0, 2)),
                                      ground_state(lat, SegmentSpec::window(2, 2))};
  const auto before = solve_generalized(build_effective_problem(states, lat));
  states.push_back(ground_state(lat, SegmentSpec::window(1, 2)));
  const auto after = solve_generalized(build_effective_problem(states, lat));
  if (after.retained_modes > before.retained_modes)
    CHECK(after.energy <= before.energy + 1e-9);
}

TEST_CASE("interior windows share the segment ground energy") {
  const auto lat = lattice_for(6, 3, 0.5, 1.0);
  const auto e0 = lowest_eigenpair(build_segment_hamiltonian(lat, SegmentSpec::window(0, 2)), {});
  const auto e3 = lowest_eigenpair(build_segment_hamiltonian(lat, SegmentSpec::window(3, 2)), {});
  CHECK(e0.energy == doctest::Approx(e3.energy).epsilon(1e-12));
}

TEST_CASE("g=0 stitching recovers the exact tight-binding chain") {
  // With N_p = 1 the three embedded windows span the exact ground state.
  LatticeSpec lat;
  lat.num_sites = 4;
  lat.phonon_levels = 1;
  lat.phonon_frequency = 0.5;
  const auto run = ec_ground_energy(lat, 2, true);
  const double exact = -2.0 * std::cos(std::numbers::pi / 5.0);
  CHECK(run.result.energy >= exact - 1e-9);
  CHECK(run.result.energy == doctest::Approx(exact).epsilon(1e-8));
}

TEST_CASE("pipeline equivalence: stitching the exact segment state") {
  const auto lat = lattice_for(5, 3, 0.5, 1.0);
  const auto segments = generate_segments(5, 2, true);
  const auto h_seg = build_segment_hamiltonian(lat, SegmentSpec::window(0, 2));
  const auto ground = lowest_eigenpair(h_seg, {});
  const auto direct = stitch_training_state(lat, segments, ground.vector, 1e-10);
  const auto pipeline = ec_ground_energy(lat, 2, true);
  CHECK(direct.result.energy == doctest::Approx(pipeline.result.energy).epsilon(1e-12));
}

// Regression pin: values frozen from the first oracle run of this
// configuration (N_s=6, N_p=3, omega=0.5, lambda=1, N_k=2 with overlaps).
TEST_CASE("stitched energy regression on an oracle-tractable lattice") {
  const auto lat = lattice_for(6, 3, 0.5, 1.0);
  const auto run = ec_ground_energy(lat, 2, true);
  const auto exact = oracle::exact_ground(lat);
  CHECK(run.result.energy >= exact.energy - 1e-9);
  CHECK(run.result.energy == doctest::Approx(-2.382629051446).epsilon(1e-7));
  CHECK(exact.energy == doctest::Approx(-2.533703216601).epsilon(1e-7));
}
