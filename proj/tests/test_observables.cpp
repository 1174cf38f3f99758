#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>
#include <numeric>
#include <random>

#include "dwell/fock.hpp"
#include "dwell/hamiltonian.hpp"
#include "dwell/observables.hpp"
#include "dwell/spectra.hpp"

using namespace dwell;
using Catch::Matchers::WithinAbs;

namespace {

Spectrum synthetic(std::vector<double> e, int n) {
  Spectrum s;
  s.energies = std::move(e);
  s.n_particles = n;
  return s;
}

// Spacing samples with unit mean: exponential (Poisson statistics) and
// Rayleigh (Wigner surmise).
std::vector<double> poisson_levels(std::size_t n, std::mt19937& rng) {
  std::exponential_distribution<double> exp1(1.0);
  std::vector<double> levels(n);
  double acc = 0.0;
  for (double& x : levels) x = (acc += exp1(rng));
  return levels;
}

std::vector<double> wigner_levels(std::size_t n, std::mt19937& rng) {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::vector<double> levels(n);
  double acc = 0.0;
  for (double& x : levels)
    x = (acc += std::sqrt(-4.0 * std::log1p(-uni(rng)) / M_PI));
  return levels;
}

double mean_eta(const ChaosProfile& prof) {
  double s = 0.0;
  for (const auto& pt : prof.points) s += pt.eta;
  return s / prof.points.size();
}

}  // namespace

TEST_CASE("fisher on hand-built states") {
  const FullBasis basis = build_basis(2, Model::AtomsOnly);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(3);

  v(basis.index_of(FockState{2, 0, 0})) = 1.0;
  CHECK_THAT(fisher(v, basis), WithinAbs(0.0, 1e-14));

  v.setZero();
  v(basis.index_of(FockState{2, 0, 0})) = 1.0 / std::sqrt(2.0);
  v(basis.index_of(FockState{0, 2, 0})) = 1.0 / std::sqrt(2.0);
  CHECK_THAT(fisher(v, basis), WithinAbs(4.0, 1e-14));
}

TEST_CASE("fisher of the N-particle cat state is N^2") {
  for (int n : {4, 10, 30}) {
    const FullBasis basis = build_basis(n, Model::AtomsOnly);
    Eigen::VectorXd v = Eigen::VectorXd::Zero(basis.dimension());
    v(basis.index_of(FockState{n, 0, 0})) = 1.0 / std::sqrt(2.0);
    v(basis.index_of(FockState{0, n, 0})) = 1.0 / std::sqrt(2.0);
    CHECK_THAT(fisher(v, basis), WithinAbs(double(n) * n, 1e-10));
  }
}

TEST_CASE("fisher input validation") {
  const FullBasis basis = build_basis(2, Model::AtomsOnly);
  Eigen::VectorXd bad_dim = Eigen::VectorXd::Zero(4);
  CHECK_THROWS_AS(fisher(bad_dim, basis), std::invalid_argument);
  Eigen::VectorXd unnormalized = Eigen::VectorXd::Constant(3, 0.9);
  CHECK_THROWS_AS(fisher(unnormalized, basis), std::invalid_argument);
}

TEST_CASE("sector eigenvectors expand to full-basis eigenvectors") {
  const ModelParams p{1.0, -3.0, 5.0, 5.0};
  const FullBasis full = build_basis(12, Model::AtomsMolecule);
  auto [even, odd] = split_parity(full);
  const Eigen::MatrixXd h_full = detail::to_dense(build_h2(full, p));
  for (const SectorBasis* sec : {&even, &odd}) {
    const Spectrum s = lowest_k(build_h2(*sec, p), 3, true);
    for (std::size_t k = 0; k < s.energies.size(); ++k) {
      const Eigen::VectorXd v =
          sector_to_full(s.vectors.col(k), *sec, full);
      CHECK_THAT(v.norm(), WithinAbs(1.0, 1e-10));
      CHECK((h_full * v - s.energies[k] * v).cwiseAbs().maxCoeff() < 1e-9);
    }
  }
}

TEST_CASE("ground-state fisher grows deep into the broken regime") {
  const int n = 20;
  const FullBasis full = build_basis(n, Model::AtomsOnly);
  auto [even, odd] = split_parity(full);
  double prev = -1.0;
  for (double u : {0.0, -1.0, -2.0, -5.0}) {
    const Spectrum s = lowest_k(build_h1(even, {1.0, u}), 1, true);
    const double f = fisher(sector_to_full(s.vectors.col(0), even, full), full);
    CHECK(f > prev);
    prev = f;
  }
  // at strong attraction the ground state approaches the cat state
  CHECK(prev > 0.9 * n * n);
}

TEST_CASE("gs_gap matches a full-spectrum oracle") {
  for (double u : {-3.0, -1.0, 1.0}) {
    const ModelParams p{1.0, u, 5.0, 5.0};
    const int n = 10;
    const Spectrum full =
        full_spectrum(build_h2(build_basis(n, Model::AtomsMolecule), p));
    CHECK_THAT(gs_gap(p, Model::AtomsMolecule, n),
               WithinAbs(full.energies[1] - full.energies[0], 1e-10));
  }
}

TEST_CASE("degeneracy_profile on a half-degenerate synthetic spectrum") {
  // lower 100 levels: 50 exact pairs; upper 100: well-separated singles
  std::vector<double> e;
  for (int i = 0; i < 50; ++i) {
    e.push_back(-40.0 + i * 0.5);
    e.push_back(-40.0 + i * 0.5);
  }
  for (int i = 0; i < 100; ++i) e.push_back(0.0 + i * 0.5);
  const DegeneracyProfile prof = degeneracy_profile(synthetic(e, 10));
  REQUIRE(prof.points.size() == 11);
  CHECK_THAT(prof.points.front().fraction, WithinAbs(1.0, 1e-14));
  CHECK_THAT(prof.points.back().fraction, WithinAbs(0.0, 1e-14));
  CHECK_THAT(prof.points.front().energy_pp,
             WithinAbs(-2.775, 1e-12));  // mean of lower window / N
  // fraction decreases monotonically through the crossover
  for (std::size_t i = 1; i < prof.points.size(); ++i)
    CHECK(prof.points[i].fraction <= prof.points[i - 1].fraction + 1e-12);
}

TEST_CASE("degeneracy pairing is greedy: a level joins one pair only") {
  // a triple of equal levels yields one pair, not two
  std::vector<double> e;
  e.push_back(5.0);
  e.push_back(5.0);
  e.push_back(5.0);
  for (int i = 0; i < 97; ++i) e.push_back(10.0 + i);
  const DegeneracyProfile prof = degeneracy_profile(synthetic(e, 10));
  REQUIRE(prof.points.size() == 1);
  CHECK_THAT(prof.points[0].fraction, WithinAbs(1.0 / 50.0, 1e-14));
}

TEST_CASE("degeneracy tolerance is relative with an absolute floor") {
  std::vector<double> e;
  e.push_back(1000.0);
  e.push_back(1000.0005);  // |dE|/|E| = 5e-7 < 1e-6: a pair
  e.push_back(2000.0);
  e.push_back(2000.01);  // 5e-6 > 1e-6: not a pair
  for (int i = 0; i < 96; ++i) e.push_back(3000.0 + i);
  const DegeneracyProfile prof = degeneracy_profile(synthetic(e, 10));
  CHECK_THAT(prof.points[0].fraction, WithinAbs(1.0 / 50.0, 1e-14));
}

TEST_CASE("dos_histogram conserves counts and centers bins") {
  std::vector<double> e;
  for (int i = 0; i <= 1000; ++i) e.push_back(i * 0.01);
  const DosHistogram h = dos_histogram(synthetic(e, 10));
  double total = 0.0;
  for (const auto& b : h.bins) total += b.count;
  CHECK_THAT(total, WithinAbs(1001.0, 1e-12));
  CHECK_THAT(h.bin_width, WithinAbs(0.01, 1e-12));
  CHECK_THAT(h.bins.front().center,
             WithinAbs(0.0 + 0.5 * h.bin_width, 1e-12));
  // uniform spectrum: every bin holds about the same share
  for (const auto& b : h.bins) CHECK(std::abs(b.count - 10.0) <= 1.0);
}

TEST_CASE("unfolding a linear spectrum gives unit spacings") {
  std::vector<double> e;
  for (int i = 0; i < 300; ++i) e.push_back(7.0 + 0.3 * i);
  const std::vector<double> s = unfold(e);
  REQUIRE(s.size() == 299);
  for (double x : s) CHECK_THAT(x, WithinAbs(1.0, 1e-8));
}

TEST_CASE("unfolded spacings always have mean exactly 1") {
  std::mt19937 rng(99);
  const std::vector<double> e = poisson_levels(400, rng);
  const std::vector<double> s = unfold(e);
  const double mean = std::accumulate(s.begin(), s.end(), 0.0) / s.size();
  CHECK_THAT(mean, WithinAbs(1.0, 1e-13));
}

TEST_CASE("eta calibration on sampled spacing ensembles") {
  std::mt19937 rng(20240501);
  SECTION("Poisson spacings give eta near 1") {
    std::exponential_distribution<double> exp1(1.0);
    std::vector<double> s(20000);
    for (double& x : s) x = exp1(rng);
    CHECK_THAT(eta_from_spacings(std::move(s)), WithinAbs(1.0, 0.08));
  }
  SECTION("Wigner spacings give eta near 0") {
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::vector<double> s(20000);
    for (double& x : s) x = std::sqrt(-4.0 * std::log1p(-uni(rng)) / M_PI);
    CHECK_THAT(eta_from_spacings(std::move(s)), WithinAbs(0.0, 0.08));
  }
}

TEST_CASE("eta_profile recovers the statistics of synthetic spectra") {
  std::mt19937 rng(777);
  SECTION("integrable-like levels") {
    const ChaosProfile prof =
        eta_profile(synthetic(poisson_levels(3000, rng), 10));
    REQUIRE(prof.points.size() >= 50);
    CHECK_THAT(mean_eta(prof), WithinAbs(1.0, 0.12));
  }
  SECTION("chaotic-like levels") {
    const ChaosProfile prof =
        eta_profile(synthetic(wigner_levels(3000, rng), 10));
    CHECK_THAT(mean_eta(prof), WithinAbs(0.0, 0.12));
  }
  SECTION("superposing two independent chaotic sequences raises eta") {
    std::vector<double> a = wigner_levels(1500, rng);
    std::vector<double> b = wigner_levels(1500, rng);
    std::vector<double> merged;
    merged.reserve(3000);
    std::merge(a.begin(), a.end(), b.begin(), b.end(),
               std::back_inserter(merged));
    // two superposed Wigner sequences sit between Wigner and Poisson
    const ChaosProfile mixed = eta_profile(synthetic(merged, 10));
    CHECK(mean_eta(mixed) > 0.15);
  }
}

TEST_CASE("observable input validation") {
  CHECK_THROWS_AS(degeneracy_profile(synthetic({1.0, 2.0}, 10)),
                  std::invalid_argument);
  CHECK_THROWS_AS(dos_histogram(synthetic({}, 10)), std::invalid_argument);
  CHECK_THROWS_AS(unfold({1.0, 2.0, 3.0}), std::invalid_argument);
  std::vector<double> short_run(100, 0.0);
  std::iota(short_run.begin(), short_run.end(), 0.0);
  CHECK_THROWS_AS(eta_profile(synthetic(short_run, 10)),
                  std::invalid_argument);
}
