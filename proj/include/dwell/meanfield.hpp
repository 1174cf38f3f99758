#pragma once

// Coherent-state variational theory: energy surface, analytic symmetric
// and symmetry-broken branches, the atoms-only closed forms, the critical
// coupling U_c, and a derivative-free numeric minimizer used as an
// independent oracle.

#include <algorithm>
#include <cmath>
#include <complex>
#include <optional>
#include <stdexcept>
#include <vector>

#include "dwell/fock.hpp"
#include "dwell/hamiltonian.hpp"

namespace dwell {

enum class Phase { Symmetric, Broken };

// A stationary point of the constrained energy surface. The unit-sphere
// constraint beta^2 + gamma_r^2 + gamma_l^2 = 1 holds to 1e-12; returned
// points satisfy gamma_r >= gamma_l and beta >= 0.
struct VariationalPoint {
  double beta = 0.0;
  double gamma_r = 0.0;
  double gamma_l = 0.0;
  double lambda = 0.0;
  double energy_pp = 0.0;
  Phase phase = Phase::Symmetric;
};

// Requested variational branch does not exist at these parameters.
struct BranchError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Coherent-state energy per particle. Atoms-only callers pass beta = 0
// (omega and g then drop out of the value).
inline double energy_surface(const ModelParams& p, double beta,
                             double gamma_r, double gamma_l) {
  const double g2 = gamma_r * gamma_r + gamma_l * gamma_l;
  return -2.0 * p.j * gamma_r * gamma_l + 0.5 * p.omega * beta * beta -
         p.g * beta * g2 +
         p.u * (std::pow(gamma_r, 4) + std::pow(gamma_l, 4));
}

inline double lagrange_multiplier(const VariationalPoint& pt,
                                  const ModelParams& p) {
  if (std::abs(pt.gamma_r) < 1e-300)
    throw std::invalid_argument("lagrange_multiplier: gamma_r is zero");
  return (2.0 * p.u * std::pow(pt.gamma_r, 3) - p.g * pt.beta * pt.gamma_r -
          p.j * pt.gamma_l) /
         pt.gamma_r;
}

namespace detail {

// Real roots of a x^3 + b x^2 + c x + d (a may be zero).
inline std::vector<double> cubic_real_roots(double a, double b, double c,
                                            double d) {
  std::vector<double> roots;
  const double scale =
      std::max({std::abs(a), std::abs(b), std::abs(c), std::abs(d), 1.0});
  if (std::abs(a) < 1e-14 * scale) {
    if (std::abs(b) < 1e-14 * scale) {
      if (std::abs(c) > 0.0) roots.push_back(-d / c);
      return roots;
    }
    const double disc = c * c - 4.0 * b * d;
    if (disc < 0.0) return roots;
    roots.push_back((-c + std::sqrt(disc)) / (2.0 * b));
    roots.push_back((-c - std::sqrt(disc)) / (2.0 * b));
    return roots;
  }
  // depressed cubic t^3 + p t + q, x = t - b/(3a)
  const double p = (3.0 * a * c - b * b) / (3.0 * a * a);
  const double q =
      (2.0 * b * b * b - 9.0 * a * b * c + 27.0 * a * a * d) /
      (27.0 * a * a * a);
  const double shift = -b / (3.0 * a);
  const double disc = q * q / 4.0 + p * p * p / 27.0;
  if (disc > 0.0) {
    const double r = std::sqrt(disc);
    const double t = std::cbrt(-q / 2.0 + r) + std::cbrt(-q / 2.0 - r);
    roots.push_back(t + shift);
  } else {
    const double rho = std::sqrt(-p * p * p / 27.0);
    const double theta = std::acos(std::clamp(-q / (2.0 * rho), -1.0, 1.0));
    const double mag = 2.0 * std::sqrt(-p / 3.0);
    for (int k = 0; k < 3; ++k)
      roots.push_back(mag * std::cos((theta + 2.0 * M_PI * k) / 3.0) + shift);
  }
  // one Newton polish per root
  for (double& x : roots)
    for (int it = 0; it < 3; ++it) {
      const double f = ((a * x + b) * x + c) * x + d;
      const double df = (3.0 * a * x + 2.0 * b) * x + c;
      if (df != 0.0) x -= f / df;
    }
  return roots;
}

inline std::vector<double> roots_in_unit(std::vector<double> roots) {
  std::vector<double> out;
  for (double r : roots)
    if (r >= -1e-12 && r <= 1.0 + 1e-12)
      out.push_back(std::clamp(r, 0.0, 1.0));
  std::sort(out.begin(), out.end());
  return out;
}

// Symmetric-branch molecular amplitude from the printed three-case
// radical form, evaluated in complex arithmetic with principal branches.
// Returns nullopt when the imaginary contamination exceeds 1e-9.
inline std::optional<double> sym_beta_radical(const ModelParams& p) {
  using C = std::complex<double>;
  const double u = p.u, g = p.g, w = p.omega, j = p.j;
  if (u == 0.0) {
    const double t = 2.0 * j + w;
    return (-t + std::sqrt(12.0 * g * g + t * t)) / (6.0 * g);
  }
  const C a = C(-9.0 * g * g + 6.0 * u * (2.0 * j - 2.0 * u + w));
  const C b = C(54.0 * g * (2.0 * j * u - g * g + u * w));
  const C croot = std::pow(b + std::sqrt(b * b + 4.0 * a * a * a), 1.0 / 3.0);
  const double cbrt2 = std::cbrt(2.0), cbrt4 = std::cbrt(4.0);
  C beta;
  if (u < 0.0) {
    const C i_sqrt3(0.0, std::sqrt(3.0));
    beta = -g / (2.0 * u) +
           (1.0 - i_sqrt3) * a / (6.0 * cbrt4 * u * croot) -
           (1.0 + i_sqrt3) * croot / (12.0 * cbrt2 * u);
  } else {
    beta = -g / (2.0 * u) - a / (3.0 * cbrt4 * u * croot) +
           croot / (6.0 * cbrt2 * u);
  }
  if (std::abs(beta.imag()) > 1e-9) return std::nullopt;
  return beta.real();
}

// Broken-branch counterpart. The printed form is branch-sensitive and
// usually fails validation; the numeric cubic then takes over.
inline std::optional<double> broken_beta_radical(const ModelParams& p) {
  using C = std::complex<double>;
  const double u = p.u, g = p.g, w = p.omega;
  if (u == 0.0) return std::nullopt;
  const C a = C(12.0 * u * (w - 4.0 * u) - 9.0 * g * g);
  const C b = C(54.0 * g * (2.0 * u * w - g * g));
  const C croot = std::pow(b + std::sqrt(b * b + 4.0 * a * a * a), 1.0 / 3.0);
  const double cbrt2 = std::cbrt(2.0);
  const C i_sqrt3(0.0, std::sqrt(3.0));
  const C beta = -g / (4.0 * u) +
                 (1.0 - i_sqrt3) * a / (12.0 * cbrt2 * u * croot) -
                 (1.0 + i_sqrt3) * croot / (24.0 * cbrt2 * u);
  if (std::abs(beta.imag()) > 1e-9) return std::nullopt;
  return beta.real();
}

// Stationarity cubic of the symmetric branch:
//   2U b^3 + 3g b^2 + (w + 2J - 2U) b - g = 0.
inline double sym_beta(const ModelParams& p) {
  const double scale = std::max({std::abs(p.u), p.g, 1.0});
  if (auto r = sym_beta_radical(p)) {
    const double b = *r;
    const double resid = ((2.0 * p.u * b + 3.0 * p.g) * b +
                          (p.omega + 2.0 * p.j - 2.0 * p.u)) *
                             b -
                         p.g;
    if (b >= -1e-12 && b <= 1.0 + 1e-12 && std::abs(resid) <= 1e-8 * scale)
      return std::clamp(b, 0.0, 1.0);
  }
  auto roots = roots_in_unit(cubic_real_roots(
      2.0 * p.u, 3.0 * p.g, p.omega + 2.0 * p.j - 2.0 * p.u, -p.g));
  if (roots.empty())
    throw BranchError("solve_symmetric: no real beta in [0,1]");
  // with several candidates pick the lowest-energy stationary point
  double best = roots.front(), best_e = 1e300;
  for (double b : roots) {
    const double gam = std::sqrt(std::max(0.0, (1.0 - b * b) / 2.0));
    const double e = energy_surface(p, b, gam, gam);
    if (e < best_e) {
      best_e = e;
      best = b;
    }
  }
  return best;
}

// Stationarity cubic of the broken branch:
//   4U b^3 + 3g b^2 + (w - 4U) b - g = 0.
inline double broken_beta(const ModelParams& p) {
  const double scale = std::max({std::abs(p.u), p.g, 1.0});
  if (auto r = broken_beta_radical(p)) {
    const double b = *r;
    const double resid =
        ((4.0 * p.u * b + 3.0 * p.g) * b + (p.omega - 4.0 * p.u)) * b - p.g;
    if (b >= -1e-12 && b <= 1.0 + 1e-12 && std::abs(resid) <= 1e-8 * scale)
      return std::clamp(b, 0.0, 1.0);
  }
  auto roots = roots_in_unit(cubic_real_roots(4.0 * p.u, 3.0 * p.g,
                                              p.omega - 4.0 * p.u, -p.g));
  if (roots.empty())
    throw BranchError("solve_broken: no real beta in [0,1]");
  return roots.front();
}

}  // namespace detail

inline VariationalPoint solve_symmetric(const ModelParams& p) {
  if (p.g == 0.0)
    throw std::invalid_argument("solve_symmetric: mixture model needs g != 0");
  VariationalPoint pt;
  pt.beta = detail::sym_beta(p);
  pt.gamma_r = pt.gamma_l =
      std::sqrt(std::max(0.0, (1.0 - pt.beta * pt.beta) / 2.0));
  pt.lambda = lagrange_multiplier(pt, p);
  pt.energy_pp = energy_surface(p, pt.beta, pt.gamma_r, pt.gamma_l);
  pt.phase = Phase::Symmetric;
  return pt;
}

inline VariationalPoint solve_broken(const ModelParams& p) {
  if (p.g == 0.0 || p.j == 0.0)
    throw std::invalid_argument("solve_broken: needs J != 0 and g != 0");
  if (p.u >= 0.0) throw BranchError("solve_broken: U >= U_c");
  VariationalPoint pt;
  pt.beta = detail::broken_beta(p);
  const double r2 = 1.0 - pt.beta * pt.beta;
  const double radicand = p.u * p.u * r2 * r2 - p.j * p.j;
  if (radicand <= 0.0)
    throw BranchError("solve_broken: branch invalid (U >= U_c)");
  pt.gamma_r =
      std::sqrt(r2 / 2.0 + std::sqrt(radicand) / (2.0 * std::abs(p.u)));
  pt.gamma_l = -p.j / (2.0 * p.u * pt.gamma_r);
  pt.lambda = lagrange_multiplier(pt, p);
  pt.energy_pp = energy_surface(p, pt.beta, pt.gamma_r, pt.gamma_l);
  pt.phase = Phase::Broken;
  return pt;
}

// Closed forms of the molecule-free limit; U_c = -1 exactly.
inline VariationalPoint solve_no_molecule(const ModelParams& p) {
  VariationalPoint pt;
  ModelParams q = p;
  q.g = 0.0;
  q.omega = 0.0;
  if (p.u >= -p.j) {
    pt.gamma_r = pt.gamma_l = 1.0 / std::sqrt(2.0);
    pt.phase = Phase::Symmetric;
  } else {
    const double u = p.u / p.j;  // dimensionless; formulas below take J=1
    pt.gamma_r = std::sqrt(0.5 + std::sqrt(u * u - 1.0) / (2.0 * std::abs(u)));
    pt.gamma_l = -p.j / (2.0 * p.u * pt.gamma_r);
    pt.phase = Phase::Broken;
  }
  pt.lambda = lagrange_multiplier(pt, q);
  pt.energy_pp = energy_surface(q, 0.0, pt.gamma_r, pt.gamma_l);
  return pt;
}

// Independent oracle: dense grid over the constrained sphere followed by
// coordinate pattern descent. Deterministic and derivative-free.
inline VariationalPoint numeric_minimize(const ModelParams& p, Model model) {
  const bool mixture = (model == Model::AtomsMolecule);
  auto eval = [&](double beta, double theta) {
    const double r = std::sqrt(std::max(0.0, 1.0 - beta * beta));
    return energy_surface(p, beta, r * std::cos(theta), r * std::sin(theta));
  };
  // gamma_r >= gamma_l >= 0 corresponds to theta in [0, pi/4]
  const double theta_hi = M_PI / 4.0;
  double best_b = 0.0, best_t = theta_hi, best_e = 1e300;
  const int nb = mixture ? 200 : 1;
  const int nt = mixture ? 200 : 4000;
  for (int ib = 0; ib < nb; ++ib) {
    const double beta = mixture ? ib / double(nb) : 0.0;
    for (int it = 0; it <= nt; ++it) {
      const double theta = theta_hi * it / nt;
      const double e = eval(beta, theta);
      if (e < best_e) {
        best_e = e;
        best_b = beta;
        best_t = theta;
      }
    }
  }
  double step = mixture ? 1.0 / 200.0 : theta_hi / 4000.0;
  while (step > 1e-12) {
    bool improved = false;
    const double cand_b[2] = {best_b - step, best_b + step};
    const double cand_t[2] = {best_t - step, best_t + step};
    if (mixture)
      for (double b : cand_b) {
        if (b < 0.0 || b > 1.0) continue;
        const double e = eval(b, best_t);
        if (e < best_e) {
          best_e = e;
          best_b = b;
          improved = true;
        }
      }
    for (double t : cand_t) {
      if (t < 0.0 || t > theta_hi) continue;
      const double e = eval(best_b, t);
      if (e < best_e) {
        best_e = e;
        best_t = t;
        improved = true;
      }
    }
    if (!improved) step *= 0.5;
  }
  VariationalPoint pt;
  pt.beta = mixture ? best_b : 0.0;
  const double r = std::sqrt(std::max(0.0, 1.0 - pt.beta * pt.beta));
  pt.gamma_r = r * std::cos(best_t);
  pt.gamma_l = r * std::sin(best_t);
  pt.phase =
      (pt.gamma_r - pt.gamma_l > 1e-5) ? Phase::Broken : Phase::Symmetric;
  ModelParams q = p;
  if (!mixture) {
    q.g = 0.0;
    q.omega = 0.0;
  }
  pt.lambda = lagrange_multiplier(pt, q);
  pt.energy_pp = best_e;
  return pt;
}

// Lowest-energy variational branch at these parameters.
inline VariationalPoint ground_state(const ModelParams& p, Model model) {
  if (model == Model::AtomsOnly) return solve_no_molecule(p);
  VariationalPoint sym = solve_symmetric(p);
  try {
    VariationalPoint broken = solve_broken(p);
    return broken.energy_pp <= sym.energy_pp ? broken : sym;
  } catch (const BranchError&) {
    return sym;
  }
}

// Critical coupling of the ground-state QPT. Atoms-only is analytic;
// the mixture value comes from matching the two beta branches, with a
// coarse phase-indicator scan from the numeric minimizer to secure a
// bracket.
inline double critical_u(const ModelParams& p, Model model) {
  if (model == Model::AtomsOnly) return -1.0;
  if (p.g == 0.0)
    throw std::invalid_argument("critical_u: mixture model needs g != 0");

  auto beta_mismatch = [&](double u) {
    ModelParams q = p;
    q.u = u;
    return detail::sym_beta(q) - detail::broken_beta(q);
  };
  auto broken_here = [&](double u) {
    ModelParams q = p;
    q.u = u;
    VariationalPoint pt = numeric_minimize(q, Model::AtomsMolecule);
    return pt.gamma_r - pt.gamma_l > 1e-3;
  };

  // coarse bracket from the symmetry of the numeric minimum
  double hi = -1e-3;
  double lo = hi;
  double step = 0.25;
  while (lo > -50.0 && !broken_here(lo)) {
    hi = lo;
    lo -= step;
    step *= 1.5;
  }
  if (lo <= -50.0)
    throw std::runtime_error("critical_u: no bracket found in [-50, 0)");

  double flo = beta_mismatch(lo), fhi = beta_mismatch(hi);
  if (flo * fhi > 0.0) {
    // fall back to bisecting the phase indicator itself
    while (hi - lo > 1e-6) {
      const double mid = 0.5 * (lo + hi);
      (broken_here(mid) ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  }
  while (hi - lo > 1e-6) {
    const double mid = 0.5 * (lo + hi);
    const double fmid = beta_mismatch(mid);
    if (flo * fmid <= 0.0) {
      hi = mid;
      fhi = fmid;
    } else {
      lo = mid;
      flo = fmid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace dwell
