#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>

#include "dwell/fluctuations.hpp"
#include "dwell/meanfield.hpp"

using namespace dwell;
using Catch::Matchers::WithinAbs;

namespace {

constexpr ModelParams mixture(double u) { return {1.0, u, 5.0, 5.0}; }

// Independent route to the excitation energies: fold the +-paired
// spectrum of the full [[Y,Z],[-Z,-Y]] eigenproblem onto its upper half.
// The zero mode is defective there, so it only resolves to ~sqrt(eps).
std::vector<double> deltas_via_big_matrix(const BogoliubovBlocks& b) {
  const Eigen::Index n = b.y.rows();
  Eigen::MatrixXd m(2 * n, 2 * n);
  m.topLeftCorner(n, n) = b.y;
  m.topRightCorner(n, n) = b.z;
  m.bottomLeftCorner(n, n) = -b.z;
  m.bottomRightCorner(n, n) = -b.y;
  Eigen::EigenSolver<Eigen::MatrixXd> solver(m, false);
  std::vector<double> evals;
  for (Eigen::Index i = 0; i < 2 * n; ++i) {
    const auto ev = solver.eigenvalues()(i);
    REQUIRE(std::abs(ev.imag()) < 1e-6);
    evals.push_back(ev.real());
  }
  std::sort(evals.begin(), evals.end());
  std::vector<double> out(evals.begin() + n, evals.end());
  for (double& x : out) x = std::max(0.0, x);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST_CASE("atoms-only symmetric blocks and modes at U = 0") {
  const ModelParams p{1.0, 0.0};
  const VariationalPoint pt = solve_no_molecule(p);
  const BogoliubovBlocks b = build_blocks(pt, p, Model::AtomsOnly);
  REQUIRE(b.y.rows() == 2);
  CHECK_THAT(b.y(0, 0), WithinAbs(1.0, 1e-14));
  CHECK_THAT(b.y(0, 1), WithinAbs(-1.0, 1e-14));
  CHECK_THAT(b.y(1, 1), WithinAbs(1.0, 1e-14));
  CHECK(b.z.cwiseAbs().maxCoeff() < 1e-14);

  const FluctuationSpectrum fs = excitations(b);
  REQUIRE(fs.deltas.size() == 2);
  CHECK_THAT(fs.deltas[0], WithinAbs(0.0, 1e-12));
  CHECK_THAT(fs.deltas[1], WithinAbs(2.0, 1e-12));
  CHECK(fs.goldstone_index == 0);
  CHECK_THAT(fs.gs_correction, WithinAbs(0.0, 1e-12));
}

TEST_CASE("atoms-only symmetric gap is 2 sqrt(J(J+U))") {
  for (double u : {-0.9, -0.5, 0.0, 1.0, 4.0}) {
    const ModelParams p{1.0, u};
    const FluctuationSpectrum fs =
        excitations(build_blocks(solve_no_molecule(p), p, Model::AtomsOnly));
    CHECK_THAT(fs.deltas.back(), WithinAbs(2.0 * std::sqrt(1.0 + u), 1e-10));
    CHECK_THAT(fs.deltas[fs.goldstone_index], WithinAbs(0.0, 1e-10));
    CHECK_THAT(fs.gs_correction,
               WithinAbs(std::sqrt(1.0 + u) - u - 1.0, 1e-10));
  }
}

TEST_CASE("atoms-only broken gap is 2 sqrt(U^2 - J^2)") {
  for (double u : {-1.5, -2.0, -4.0}) {
    const ModelParams p{1.0, u};
    const FluctuationSpectrum fs =
        excitations(build_blocks(solve_no_molecule(p), p, Model::AtomsOnly));
    CHECK_THAT(fs.deltas.back(),
               WithinAbs(2.0 * std::sqrt(u * u - 1.0), 1e-9));
    CHECK_THAT(fs.deltas[fs.goldstone_index], WithinAbs(0.0, 1e-9));
  }
}

TEST_CASE("symmetric branch below U_c is not a minimum") {
  const ModelParams p{1.0, -3.0};
  const VariationalPoint saddle = solve_no_molecule({1.0, 0.0});
  // re-dress the symmetric configuration with the U = -3 multiplier
  VariationalPoint pt = saddle;
  pt.lambda = -3.0 - 1.0;
  pt.energy_pp = energy_surface(p, 0.0, pt.gamma_r, pt.gamma_l);
  CHECK_THROWS_AS(excitations(build_blocks(pt, p, Model::AtomsOnly)),
                  InstabilityError);
}

TEST_CASE("mixture modes match the full Bogoliubov eigenproblem") {
  for (double u : {-5.0, -3.0, -0.5, 0.0, 2.0}) {
    const ModelParams p = mixture(u);
    const VariationalPoint pt = ground_state(p, Model::AtomsMolecule);
    const BogoliubovBlocks b = build_blocks(pt, p, Model::AtomsMolecule);
    REQUIRE(b.y.rows() == 3);
    const FluctuationSpectrum fs = excitations(b);
    const std::vector<double> ref = deltas_via_big_matrix(b);
    REQUIRE(fs.deltas.size() == ref.size());
    for (std::size_t i = 0; i < ref.size(); ++i)
      CHECK_THAT(fs.deltas[i], WithinAbs(ref[i], 1e-6));
    CHECK(fs.deltas[fs.goldstone_index] == 0.0);
  }
}

TEST_CASE("h_half_residual vanishes only at stationary points") {
  const ModelParams p = mixture(-3.0);
  const VariationalPoint pt = ground_state(p, Model::AtomsMolecule);
  CHECK(h_half_residual(pt, p, Model::AtomsMolecule) < 1e-10);

  VariationalPoint off = pt;
  off.beta += 0.05;
  const double nrm = std::sqrt(off.beta * off.beta + off.gamma_r * off.gamma_r +
                               off.gamma_l * off.gamma_l);
  off.beta /= nrm;
  off.gamma_r /= nrm;
  off.gamma_l /= nrm;
  CHECK(h_half_residual(off, p, Model::AtomsMolecule) > 1e-3);
  CHECK_THROWS_AS(build_blocks(off, p, Model::AtomsMolecule),
                  std::invalid_argument);
}

TEST_CASE("noninteracting corrected energy is -N") {
  for (int n : {10, 100, 1000})
    CHECK_THAT(bmf_energy({1.0, 0.0}, Model::AtomsOnly, n),
               WithinAbs(-double(n), 1e-10));
}

TEST_CASE("quasiparticle ladder of the single atoms-only mode") {
  const ModelParams p{1.0, 1.0};
  const double delta = 2.0 * std::sqrt(2.0);
  const auto levels = low_spectrum_bmf(p, Model::AtomsOnly, 6);
  REQUIRE(levels.size() == 6);
  for (int q = 1; q <= 6; ++q) {
    CHECK_THAT(levels[q - 1].gap, WithinAbs(q * delta, 1e-10));
    CHECK(levels[q - 1].multiplicity == 1);
  }
}

TEST_CASE("broken-phase ladder carries the parity doubling") {
  const auto levels = low_spectrum_bmf({1.0, -3.0}, Model::AtomsOnly, 4);
  REQUIRE_FALSE(levels.empty());
  for (const auto& lv : levels) {
    CHECK(lv.multiplicity == 2);
    CHECK(lv.gap > 0.0);
  }
  CHECK_THAT(levels[0].gap, WithinAbs(2.0 * std::sqrt(8.0), 1e-9));
}

TEST_CASE("mixture ladder combines the two massive modes") {
  const ModelParams p = mixture(2.0);
  const FluctuationSpectrum fs = excitations(
      build_blocks(ground_state(p, Model::AtomsMolecule), p,
                   Model::AtomsMolecule));
  std::vector<double> modes;
  for (std::size_t i = 0; i < fs.deltas.size(); ++i)
    if (i != fs.goldstone_index) modes.push_back(fs.deltas[i]);
  REQUIRE(modes.size() == 2);
  const auto levels = low_spectrum_bmf(p, Model::AtomsMolecule, 6, 4);
  REQUIRE(levels.size() == 4);
  CHECK_THAT(levels[0].gap, WithinAbs(std::min(modes[0], modes[1]), 1e-9));
  // second level: either two quanta of the soft mode or one of the hard one
  const double second =
      std::min(2.0 * std::min(modes[0], modes[1]), std::max(modes[0], modes[1]));
  CHECK_THAT(levels[1].gap, WithinAbs(second, 1e-9));
}
