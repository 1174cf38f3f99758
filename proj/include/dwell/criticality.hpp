#pragma once

// Finite-size QPT precursors, power-law scaling fits, ESQPT boundary
// extraction from degeneracy profiles, and phase-diagram assembly.

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "dwell/fock.hpp"
#include "dwell/hamiltonian.hpp"
#include "dwell/meanfield.hpp"
#include "dwell/observables.hpp"
#include "dwell/spectra.hpp"

namespace dwell {

// Merged-parity full spectrum of the model at (N, p). Values only.
inline Spectrum model_spectrum(const ModelParams& p, Model model, int n) {
  const FullBasis full = build_basis(n, model);
  auto [even, odd] = split_parity(full);
  auto matrix = [&](const SectorBasis& b) {
    return model == Model::AtomsOnly ? build_h1(b, p) : build_h2(b, p);
  };
  Spectrum se = full_spectrum(matrix(even));
  Spectrum so;
  if (odd.dimension() > 0) so = full_spectrum(matrix(odd));
  se.n_particles = so.n_particles = n;
  return merge_sectors(se, so);
}

// Largest U at which gap(U) < bound, located by bisection to `tol`. The
// gap function is injectable so synthetic gap models can exercise the
// search logic directly.
inline double precursor_u(const std::function<double(double)>& gap_pp,
                          double bound, double u_lo, double u_hi,
                          double tol = 1e-5) {
  if (bound <= 0.0) throw std::invalid_argument("precursor_u: bound <= 0");
  if (!(gap_pp(u_lo) < bound))
    throw std::runtime_error("precursor_u: gap never below bound in range");
  if (!(gap_pp(u_hi) >= bound))
    throw std::runtime_error("precursor_u: gap below bound at upper edge");
  while (u_hi - u_lo > tol) {
    const double mid = 0.5 * (u_lo + u_hi);
    (gap_pp(mid) < bound ? u_lo : u_hi) = mid;
  }
  return 0.5 * (u_lo + u_hi);
}

inline double precursor_u(int n, const ModelParams& p, Model model,
                          double gap_bound, double u_lo = -8.0,
                          double u_hi = 0.0) {
  auto gap = [&](double u) {
    ModelParams q = p;
    q.u = u;
    return gs_gap(q, model, n);
  };
  return precursor_u(gap, gap_bound, u_lo, u_hi);
}

struct ScalingFit {
  double alpha = 0.0;
  double alpha_err = 0.0;
  double u_c_ref = 0.0;
  std::vector<std::pair<double, double>> samples;  // (N, U_c^{(N)})
};

// Least-squares power law |U_c^{(N)} - U_c| ~ N^{-alpha} on log-log axes.
inline ScalingFit scaling_fit(
    const std::vector<std::pair<double, double>>& samples, double u_c_ref) {
  if (samples.size() < 3)
    throw std::invalid_argument("scaling_fit: needs at least 3 samples");
  std::vector<double> x, y;
  for (const auto& [n, ucn] : samples) {
    const double diff = std::abs(ucn - u_c_ref);
    if (diff <= 0.0)
      throw std::invalid_argument("scaling_fit: sample coincides with U_c");
    x.push_back(std::log(n));
    y.push_back(std::log(diff));
  }
  const std::size_t m = x.size();
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double denom = m * sxx - sx * sx;
  const double slope = (m * sxy - sx * sy) / denom;
  const double intercept = (sy - slope * sx) / m;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double r = y[i] - (slope * x[i] + intercept);
    ss_res += r * r;
  }
  const double var_slope =
      (m > 2) ? ss_res / (m - 2) * m / denom : 0.0;
  ScalingFit fit;
  fit.alpha = -slope;
  fit.alpha_err = std::sqrt(std::max(0.0, var_slope));
  fit.u_c_ref = u_c_ref;
  fit.samples = samples;
  return fit;
}

namespace detail {

// Half-height location of a logistic fit to a degeneracy profile; nullopt
// when the profile has no step of height >= 0.5.
inline std::optional<double> degeneracy_step(const DegeneracyProfile& prof) {
  const auto& pts = prof.points;
  if (pts.size() < 6) return std::nullopt;
  auto head = [&](int k) {
    double s = 0.0;
    for (int i = 0; i < k; ++i) s += pts[i].fraction;
    return s / k;
  };
  auto tail = [&](int k) {
    double s = 0.0;
    for (int i = 0; i < k; ++i) s += pts[pts.size() - 1 - i].fraction;
    return s / k;
  };
  const double lo_frac = head(3), hi_frac = tail(3);
  if (std::abs(hi_frac - lo_frac) < 0.5) return std::nullopt;

  const double e_min = pts.front().energy_pp, e_max = pts.back().energy_pp;
  const double span = e_max - e_min;
  if (span <= 0.0) return std::nullopt;
  auto sse = [&](double ec, double w) {
    double s = 0.0;
    for (const auto& pt : pts) {
      const double model =
          lo_frac + (hi_frac - lo_frac) / (1.0 + std::exp(-(pt.energy_pp - ec) / w));
      const double r = pt.fraction - model;
      s += r * r;
    }
    return s;
  };
  double best_ec = 0.5 * (e_min + e_max), best_w = span / 50.0, best = 1e300;
  for (double w : {span / 200.0, span / 100.0, span / 50.0, span / 20.0,
                   span / 10.0}) {
    for (int i = 0; i <= 400; ++i) {
      const double ec = e_min + span * i / 400.0;
      const double s = sse(ec, w);
      if (s < best) {
        best = s;
        best_ec = ec;
        best_w = w;
      }
    }
  }
  // golden-section refinement of the crossing at the best width
  double a = best_ec - span / 400.0, b = best_ec + span / 400.0;
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int it = 0; it < 60; ++it) {
    const double c = b - phi * (b - a), d = a + phi * (b - a);
    if (sse(c, best_w) < sse(d, best_w))
      b = d;
    else
      a = c;
  }
  return 0.5 * (a + b);
}

}  // namespace detail

enum class EsqptSide { BelowUc, AboveUtilde };

struct EsqptBoundary {
  std::vector<std::pair<double, double>> segments;  // (U, E_c per particle)
  std::vector<double> omitted;                      // grid U with no step
  EsqptSide side = EsqptSide::BelowUc;
  bool has_fit = false;
  double slope = 0.0;
  double intercept = 0.0;
};

inline EsqptBoundary esqpt_boundary(const ModelParams& p, Model model, int n,
                                    const std::vector<double>& u_grid,
                                    int window = 100, int stride = 10,
                                    double rel_tol = 1e-6) {
  EsqptBoundary boundary;
  if (u_grid.empty())
    throw std::invalid_argument("esqpt_boundary: empty U grid");
  boundary.side =
      u_grid.front() < 0.0 ? EsqptSide::BelowUc : EsqptSide::AboveUtilde;
  for (double u : u_grid) {
    ModelParams q = p;
    q.u = u;
    const Spectrum spec = model_spectrum(q, model, n);
    const DegeneracyProfile prof =
        degeneracy_profile(spec, window, stride, rel_tol);
    if (auto ec = detail::degeneracy_step(prof))
      boundary.segments.emplace_back(u, *ec);
    else
      boundary.omitted.push_back(u);
  }
  if (boundary.segments.size() >= 2) {
    const std::size_t m = boundary.segments.size();
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (const auto& [u, ec] : boundary.segments) {
      sx += u;
      sy += ec;
      sxx += u * u;
      sxy += u * ec;
    }
    const double denom = m * sxx - sx * sx;
    if (std::abs(denom) > 1e-12) {
      boundary.slope = (m * sxy - sx * sy) / denom;
      boundary.intercept = (sy - boundary.slope * sx) / m;
      boundary.has_fit = true;
    }
  }
  return boundary;
}

struct PhaseDiagram {
  struct Cell {
    double u;
    double energy_pp;
    bool degenerate;
  };
  std::vector<Cell> cells;
  double u_c = 0.0;        // mean-field ground-state critical coupling
  double u_tilde_c = 0.0;  // top-of-spectrum precursor
  bool has_u_tilde = false;
};

// Finite-size precursor of the highest-excited-state transition: the gap
// criterion applied to the top of the spectrum (the ground state of -H).
inline double top_precursor_u(int n, const ModelParams& p, Model model,
                              double gap_bound, double u_lo = 0.0,
                              double u_hi = 8.0) {
  auto top_gap = [&](double u) {
    ModelParams q = p;
    q.u = u;
    const FullBasis full = build_basis(n, model);
    auto [even, odd] = split_parity(full);
    auto matrix = [&](const SectorBasis& b) {
      SymMatrix m =
          model == Model::AtomsOnly ? build_h1(b, q) : build_h2(b, q);
      for (auto& e : m.entries) e.value = -e.value;
      return m;
    };
    std::vector<double> lows;
    for (const SectorBasis* b : {&even, &odd}) {
      if (b->dimension() == 0) continue;
      Spectrum s = lowest_k(matrix(*b), std::min<std::size_t>(2, b->dimension()));
      for (double e : s.energies) lows.push_back(e);
    }
    std::sort(lows.begin(), lows.end());
    return lows[1] - lows[0];
  };
  // bisect for the smallest U with top gap < bound
  if (!(top_gap(u_hi) < gap_bound))
    throw std::runtime_error("top_precursor_u: gap never below bound in range");
  if (!(top_gap(u_lo) >= gap_bound))
    throw std::runtime_error("top_precursor_u: gap below bound at lower edge");
  while (u_hi - u_lo > 1e-5) {
    const double mid = 0.5 * (u_lo + u_hi);
    (top_gap(mid) < gap_bound ? u_hi : u_lo) = mid;
  }
  return 0.5 * (u_lo + u_hi);
}

inline PhaseDiagram phase_diagram(const ModelParams& p, Model model, int n,
                                  const std::vector<double>& u_grid,
                                  int window = 100, int stride = 10,
                                  double rel_tol = 1e-6,
                                  double gap_bound = 0.1) {
  PhaseDiagram diagram;
  diagram.u_c = critical_u(p, model);
  for (double u : u_grid) {
    ModelParams q = p;
    q.u = u;
    const Spectrum spec = model_spectrum(q, model, n);
    const DegeneracyProfile prof =
        degeneracy_profile(spec, window, stride, rel_tol);
    for (const auto& pt : prof.points)
      diagram.cells.push_back({u, pt.energy_pp, pt.fraction >= 0.5});
  }
  try {
    diagram.u_tilde_c = top_precursor_u(n, p, model, gap_bound);
    diagram.has_u_tilde = true;
  } catch (const std::runtime_error&) {
    diagram.has_u_tilde = false;
  }
  return diagram;
}

}  // namespace dwell
