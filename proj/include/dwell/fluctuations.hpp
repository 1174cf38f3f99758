#pragma once

// Quadratic (beyond-mean-field) expansion around a variational minimum:
// Y/Z blocks, diagonalization of the Bogoliubov matrix [[Y,Z],[-Z,-Y]],
// Goldstone mode, ground-state energy correction and the low-lying
// quasiparticle ladder.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "dwell/fock.hpp"
#include "dwell/hamiltonian.hpp"
#include "dwell/meanfield.hpp"

namespace dwell {

// 3x3 blocks for the mixture; the decoupled molecular mode is dropped for
// the atoms-only model, leaving 2x2 blocks.
struct BogoliubovBlocks {
  Eigen::MatrixXd y;
  Eigen::MatrixXd z;
};

struct FluctuationSpectrum {
  std::vector<double> deltas;   // non-negative, ascending
  std::size_t goldstone_index = 0;
  double gs_correction = 0.0;   // (1/2) sum Delta_i - (1/2) Tr Y
};

// Non-minimum stationary data: complex Bogoliubov eigenvalues.
struct InstabilityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Norm of the linear (order sqrt(N)) term of the expansion, which is the
// constrained gradient of the energy surface at the point. Vanishes at a
// true stationary point.
inline double h_half_residual(const VariationalPoint& pt,
                              const ModelParams& p, Model model) {
  const double b = pt.beta, gr = pt.gamma_r, gl = pt.gamma_l;
  const double de_db = p.omega * b - p.g * (gr * gr + gl * gl);
  const double de_dgr =
      -2.0 * p.j * gl - 2.0 * p.g * b * gr + 4.0 * p.u * gr * gr * gr;
  const double de_dgl =
      -2.0 * p.j * gr - 2.0 * p.g * b * gl + 4.0 * p.u * gl * gl * gl;
  if (model == Model::AtomsOnly) {
    const double de_dgr0 = -2.0 * p.j * gl + 4.0 * p.u * gr * gr * gr;
    const double de_dgl0 = -2.0 * p.j * gr + 4.0 * p.u * gl * gl * gl;
    const double lam = 0.5 * (gr * de_dgr0 + gl * de_dgl0);
    const double rr = de_dgr0 - 2.0 * lam * gr;
    const double rl = de_dgl0 - 2.0 * lam * gl;
    return std::sqrt(rr * rr + rl * rl);
  }
  const double lam = 0.5 * (b * de_db + gr * de_dgr + gl * de_dgl);
  const double rb = de_db - 2.0 * lam * b;
  const double rr = de_dgr - 2.0 * lam * gr;
  const double rl = de_dgl - 2.0 * lam * gl;
  return std::sqrt(rb * rb + rr * rr + rl * rl);
}

inline BogoliubovBlocks build_blocks(const VariationalPoint& pt,
                                     const ModelParams& p, Model model) {
  if (h_half_residual(pt, p, model) > 1e-8)
    throw std::invalid_argument("build_blocks: point is not stationary");
  const double u = p.u, g = p.g, j = p.j, w = p.omega;
  const double gr = pt.gamma_r, gl = pt.gamma_l, lam = pt.lambda;
  BogoliubovBlocks blocks;
  if (model == Model::AtomsMolecule) {
    blocks.y.resize(3, 3);
    blocks.y << 4.0 * u * gr * gr - lam, -j, -std::sqrt(2.0) * gr * g,
        -j, 4.0 * u * gl * gl - lam, -std::sqrt(2.0) * gl * g,
        -std::sqrt(2.0) * gr * g, -std::sqrt(2.0) * gl * g, w - 2.0 * lam;
    blocks.z = Eigen::Vector3d(2.0 * u * gr * gr - pt.beta * g,
                               2.0 * u * gl * gl - pt.beta * g, 0.0)
                   .asDiagonal();
  } else {
    blocks.y.resize(2, 2);
    blocks.y << 4.0 * u * gr * gr - lam, -j, -j, 4.0 * u * gl * gl - lam;
    blocks.z =
        Eigen::Vector2d(2.0 * u * gr * gr, 2.0 * u * gl * gl).asDiagonal();
  }
  return blocks;
}

// Positive Bogoliubov eigenvalues of [[Y,Z],[-Z,-Y]]. The +-paired 2n x 2n
// problem is defective at the zero mode, so the squares are computed from
// the equivalent n x n product (Y+Z)(Y-Z), where the zero eigenvalue is
// simple and comes out at machine precision; it is then snapped to 0.
inline FluctuationSpectrum excitations(const BogoliubovBlocks& b) {
  const Eigen::Index n = b.y.rows();
  const Eigen::MatrixXd k = (b.y + b.z) * (b.y - b.z);
  Eigen::EigenSolver<Eigen::MatrixXd> solver(k, /*computeEigenvectors=*/false);
  const double scale2 = std::max(1.0, k.cwiseAbs().maxCoeff());
  FluctuationSpectrum out;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto ev = solver.eigenvalues()(i);
    if (std::abs(ev.imag()) > 1e-8 * scale2 || ev.real() < -1e-8 * scale2)
      throw InstabilityError(
          "excitations: negative or complex squared mode (not a minimum)");
    out.deltas.push_back(std::sqrt(std::max(0.0, ev.real())));
  }
  std::sort(out.deltas.begin(), out.deltas.end());
  out.goldstone_index = 0;
  if (out.deltas.front() * out.deltas.front() <= 1e-8 * scale2)
    out.deltas.front() = 0.0;
  double sum = 0.0;
  for (double d : out.deltas) sum += d;
  out.gs_correction = 0.5 * sum - 0.5 * b.y.trace();
  return out;
}

// Mean-field total energy plus the O(1) fluctuation correction.
inline double bmf_energy(const ModelParams& p, Model model, int n) {
  const VariationalPoint pt = ground_state(p, model);
  const FluctuationSpectrum fs = excitations(build_blocks(pt, p, model));
  return n * pt.energy_pp + fs.gs_correction;
}

struct BmfLevel {
  double gap = 0.0;      // excitation energy above the corrected ground state
  int multiplicity = 1;  // 2 in the symmetry-broken phase
};

// Multi-quasiparticle gaps sum_i n_i Delta_i (Goldstone excluded), sorted.
inline std::vector<BmfLevel> low_spectrum_bmf(const ModelParams& p,
                                              Model model,
                                              int max_quanta = 6,
                                              std::size_t max_levels = 12) {
  const VariationalPoint pt = ground_state(p, model);
  const FluctuationSpectrum fs = excitations(build_blocks(pt, p, model));
  std::vector<double> modes;
  for (std::size_t i = 0; i < fs.deltas.size(); ++i)
    if (i != fs.goldstone_index) modes.push_back(fs.deltas[i]);

  std::vector<double> gaps;
  std::vector<int> occ(modes.size(), 0);
  auto recurse = [&](auto&& self, std::size_t mode, int quanta_left,
                     double acc) -> void {
    if (mode == modes.size()) {
      if (acc > 0.0) gaps.push_back(acc);
      return;
    }
    for (int q = 0; q <= quanta_left; ++q)
      self(self, mode + 1, quanta_left - q, acc + q * modes[mode]);
  };
  recurse(recurse, 0, max_quanta, 0.0);
  std::sort(gaps.begin(), gaps.end());
  if (gaps.size() > max_levels) gaps.resize(max_levels);

  std::vector<BmfLevel> out;
  const int mult = (pt.phase == Phase::Broken) ? 2 : 1;
  for (double g : gaps) out.push_back({g, mult});
  return out;
}

}  // namespace dwell
