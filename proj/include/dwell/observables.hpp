#pragma once

// Spectral diagnostics: Fisher-information order parameter, ground-state
// gap, degenerate-pair profile, density-of-states histogram, spectral
// unfolding and the eta chaos parameter.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "dwell/fock.hpp"
#include "dwell/hamiltonian.hpp"
#include "dwell/spectra.hpp"

namespace dwell {

// Quantum Fisher information <I^2> - <I>^2 of a normalized state over the
// full basis (I = n_R - n_L). For parity eigenstates the mean term is
// zero and this reduces to <I^2>.
inline double fisher(const Eigen::VectorXd& state, const FullBasis& basis) {
  if (static_cast<std::size_t>(state.size()) != basis.dimension())
    throw std::invalid_argument("fisher: state/basis dimension mismatch");
  if (std::abs(state.norm() - 1.0) > 1e-8)
    throw std::invalid_argument("fisher: state is not normalized");
  double m1 = 0.0, m2 = 0.0;
  for (std::size_t i = 0; i < basis.dimension(); ++i) {
    const double w = state(i) * state(i);
    const double imb = basis.states[i].n_right - basis.states[i].n_left;
    m1 += w * imb;
    m2 += w * imb * imb;
  }
  return m2 - m1 * m1;
}

// Expand a parity-sector eigenvector into the full basis.
inline Eigen::VectorXd sector_to_full(const Eigen::VectorXd& vec,
                                      const SectorBasis& sector,
                                      const FullBasis& full) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(full.dimension());
  const double sign = (sector.parity == Parity::Even) ? 1.0 : -1.0;
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (std::size_t i = 0; i < sector.dimension(); ++i) {
    const FockState& s = sector.states[i];
    if (SectorBasis::self_symmetric(s)) {
      out(full.index_of(s)) += vec(i);
    } else {
      out(full.index_of(s)) += inv_sqrt2 * vec(i);
      out(full.index_of(apply_parity(s))) += sign * inv_sqrt2 * vec(i);
    }
  }
  return out;
}

// Ground-state gap E1 - E0 from the merged parity sectors, using only the
// lowest two levels of each block.
inline double gs_gap(const ModelParams& p, Model model, int n) {
  const FullBasis full = build_basis(n, model);
  auto [even, odd] = split_parity(full);
  auto sector_matrix = [&](const SectorBasis& b) {
    return model == Model::AtomsOnly ? build_h1(b, p) : build_h2(b, p);
  };
  std::vector<double> lows;
  for (const SectorBasis* b : {&even, &odd}) {
    if (b->dimension() == 0) continue;
    Spectrum s = lowest_k(sector_matrix(*b),
                          std::min<std::size_t>(2, b->dimension()));
    for (double e : s.energies) lows.push_back(e);
  }
  std::sort(lows.begin(), lows.end());
  if (lows.size() < 2)
    throw std::invalid_argument("gs_gap: Hilbert space has fewer than 2 levels");
  return lows[1] - lows[0];
}

struct DegeneracyProfile {
  struct Point {
    double energy_pp;  // mean energy per particle of the window
    double fraction;   // degenerate pairs / (window/2), in [0,1]
  };
  std::vector<Point> points;
  int window = 100;
  int stride = 10;
  double rel_tol = 1e-6;
};

// Sliding-window fraction of degenerate pairs. A pair is two consecutive
// levels with |dE| / max(|E|, 1) <= rel_tol; the absolute floor guards
// crossings of E ~ 0. Pairing is greedy, so a level joins at most one
// pair.
inline DegeneracyProfile degeneracy_profile(const Spectrum& levels,
                                            int window = 100, int stride = 10,
                                            double rel_tol = 1e-6) {
  const std::vector<double>& e = levels.energies;
  if (static_cast<int>(e.size()) < window)
    throw std::invalid_argument("degeneracy_profile: fewer levels than window");
  if (levels.n_particles <= 0)
    throw std::invalid_argument("degeneracy_profile: spectrum lacks N");
  DegeneracyProfile prof;
  prof.window = window;
  prof.stride = stride;
  prof.rel_tol = rel_tol;
  for (std::size_t start = 0; start + window <= e.size(); start += stride) {
    int pairs = 0;
    for (int i = 0; i + 1 < window;) {
      const double a = e[start + i], b = e[start + i + 1];
      if (std::abs(b - a) <= rel_tol * std::max(std::abs(a), 1.0)) {
        ++pairs;
        i += 2;
      } else {
        ++i;
      }
    }
    const double mean =
        std::accumulate(e.begin() + start, e.begin() + start + window, 0.0) /
        window;
    prof.points.push_back(
        {mean / levels.n_particles, pairs / (window / 2.0)});
  }
  return prof;
}

struct DosHistogram {
  struct Bin {
    double center;  // energy per particle
    double count;
  };
  std::vector<Bin> bins;
  double bin_width = 0.0;
};

// Histogram of E/N. Default bin width is span/100.
inline DosHistogram dos_histogram(const Spectrum& levels,
                                  double bin_width = 0.0) {
  if (levels.energies.empty())
    throw std::invalid_argument("dos_histogram: empty spectrum");
  if (levels.n_particles <= 0)
    throw std::invalid_argument("dos_histogram: spectrum lacks N");
  std::vector<double> epp;
  epp.reserve(levels.energies.size());
  for (double e : levels.energies) epp.push_back(e / levels.n_particles);
  const double lo = epp.front(), hi = epp.back();
  if (bin_width <= 0.0) bin_width = std::max(hi - lo, 1e-12) / 100.0;
  const int nbins =
      std::max(1, static_cast<int>(std::ceil((hi - lo) / bin_width)));
  DosHistogram h;
  h.bin_width = bin_width;
  h.bins.resize(nbins);
  for (int b = 0; b < nbins; ++b) {
    h.bins[b].center = lo + (b + 0.5) * bin_width;
    h.bins[b].count = 0.0;
  }
  for (double x : epp) {
    int b = static_cast<int>((x - lo) / bin_width);
    b = std::clamp(b, 0, nbins - 1);
    h.bins[b].count += 1.0;
  }
  return h;
}

// Map energies through a smooth (degree-5 polynomial) fit of the
// cumulative level count and return the resulting spacings, rescaled to
// mean exactly 1.
inline std::vector<double> unfold(const std::vector<double>& levels,
                                  int degree = 5) {
  const std::size_t n = levels.size();
  if (n < 50) throw std::invalid_argument("unfold: needs at least 50 levels");
  const double lo = levels.front(), hi = levels.back();
  const double span = hi - lo;
  if (span <= 0.0) throw std::invalid_argument("unfold: degenerate level span");
  // centered/scaled abscissa for conditioning
  Eigen::MatrixXd vand(n, degree + 1);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = 2.0 * (levels[i] - lo) / span - 1.0;
    double pw = 1.0;
    for (int d = 0; d <= degree; ++d) {
      vand(i, d) = pw;
      pw *= x;
    }
  }
  Eigen::VectorXd counts(n);
  for (std::size_t i = 0; i < n; ++i) counts(i) = i + 0.5;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(vand);
  if (qr.rank() < degree + 1)
    throw std::invalid_argument("unfold: rank-deficient cumulative fit");
  const Eigen::VectorXd coeff = qr.solve(counts);
  Eigen::VectorXd unfolded = vand * coeff;

  std::vector<double> spacings;
  spacings.reserve(n - 1);
  double mean = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    spacings.push_back(unfolded(i + 1) - unfolded(i));
    mean += spacings.back();
  }
  mean /= spacings.size();
  for (double& s : spacings) s /= mean;
  return spacings;
}

struct ChaosProfile {
  struct Point {
    double energy_pp;
    double eta;
  };
  std::vector<Point> points;
  int window = 250;
  double trim_fraction = 0.2;
};

inline constexpr double kWignerVariance = (4.0 - M_PI) / M_PI;  // ~0.27324

// eta for one already-unfolded spacing sequence (mean-normalized).
inline double eta_from_spacings(std::vector<double> s) {
  if (s.size() < 2) throw std::invalid_argument("eta: too few spacings");
  double mean = std::accumulate(s.begin(), s.end(), 0.0) / s.size();
  double var = 0.0;
  for (double& x : s) {
    x /= mean;
    var += (x - 1.0) * (x - 1.0);
  }
  var /= s.size();
  return (var - kWignerVariance) / (1.0 - kWignerVariance);
}

// Windowed chaos parameter over a single-parity spectrum. Each window of
// `window` levels is unfolded, 20% of levels are discarded at each
// extreme, and eta is computed from the variance of the remaining
// mean-normalized spacings. Mixing parities biases eta toward Poisson, so
// single-parity input is a precondition.
inline ChaosProfile eta_profile(const Spectrum& levels, int window = 250,
                                int stride = 50, double trim_fraction = 0.2) {
  const std::vector<double>& e = levels.energies;
  if (static_cast<int>(e.size()) < window)
    throw std::invalid_argument("eta_profile: fewer levels than window");
  if (levels.n_particles <= 0)
    throw std::invalid_argument("eta_profile: spectrum lacks N");
  const int trim = static_cast<int>(window * trim_fraction);
  if (window - 2 * trim < 51)
    throw std::invalid_argument("eta_profile: window too small after trim");
  ChaosProfile prof;
  prof.window = window;
  prof.trim_fraction = trim_fraction;
  for (std::size_t start = 0; start + window <= e.size(); start += stride) {
    std::vector<double> chunk(e.begin() + start, e.begin() + start + window);
    // unfold on the full window, then drop the trimmed extremes
    std::vector<double> spacings = unfold(chunk);
    std::vector<double> kept(spacings.begin() + trim, spacings.end() - trim);
    const double mean_e =
        std::accumulate(chunk.begin(), chunk.end(), 0.0) / chunk.size();
    prof.points.push_back(
        {mean_e / levels.n_particles, eta_from_spacings(std::move(kept))});
  }
  return prof;
}

}  // namespace dwell
