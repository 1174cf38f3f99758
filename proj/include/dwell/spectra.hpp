#pragma once

// Eigenspectra of real symmetric matrices. The canonical Fock ordering
// keeps both Hamiltonians narrow-banded, so full spectra go through the
// banded LAPACK path; lowest_k uses bisection on tridiagonal matrices and
// Lanczos with full reorthogonalization on large sparse ones.

#include <lapacke.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "dwell/fock.hpp"
#include "dwell/hamiltonian.hpp"

namespace dwell {

// Ascending eigenvalues; optional eigenvector columns aligned with
// energies; optional parity tag per level. n_particles carries N for
// per-particle rescaling.
struct Spectrum {
  std::vector<double> energies;
  Eigen::MatrixXd vectors;      // 0x0 when not requested
  std::vector<Parity> labels;   // empty when unlabeled
  int n_particles = 0;

  bool has_vectors() const { return vectors.size() > 0; }
};

namespace detail {

inline void check_finite(const SymMatrix& m) {
  for (const auto& e : m.entries)
    if (!std::isfinite(e.value))
      throw std::invalid_argument("spectra: matrix has non-finite entries");
}

inline void lapack_check(lapack_int info, const char* what) {
  if (info != 0)
    throw std::runtime_error(std::string(what) + " failed, info=" +
                             std::to_string(info));
}

// Lower-band LAPACK storage, column-major: ab[(i-j) + j*ldab] = A(i,j).
inline std::vector<double> to_band(const SymMatrix& m, std::size_t kd) {
  const std::size_t ldab = kd + 1;
  std::vector<double> ab(ldab * m.dim, 0.0);
  for (const auto& e : m.entries) ab[(e.col - e.row) + e.row * ldab] = e.value;
  return ab;
}

inline Eigen::MatrixXd to_dense(const SymMatrix& m) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m.dim, m.dim);
  for (const auto& e : m.entries) {
    a(e.row, e.col) = e.value;
    a(e.col, e.row) = e.value;
  }
  return a;
}

struct Tridiag {
  std::vector<double> d, e;  // e has dim-1 entries
};

inline Tridiag to_tridiag(const SymMatrix& m) {
  Tridiag t;
  t.d.assign(m.dim, 0.0);
  t.e.assign(m.dim > 0 ? m.dim - 1 : 0, 0.0);
  for (const auto& ent : m.entries) {
    if (ent.row == ent.col)
      t.d[ent.row] = ent.value;
    else
      t.e[ent.row] = ent.value;
  }
  return t;
}

// k lowest eigenpairs of a symmetric tridiagonal matrix.
inline void stevr_lowest(Tridiag t, lapack_int k, bool want_vectors,
                         std::vector<double>& w, Eigen::MatrixXd& z) {
  const lapack_int n = static_cast<lapack_int>(t.d.size());
  w.assign(n, 0.0);
  lapack_int m_found = 0;
  std::vector<lapack_int> isuppz(2 * std::max<lapack_int>(1, k));
  Eigen::MatrixXd zz;
  if (want_vectors) zz.resize(n, k);
  lapack_int info = LAPACKE_dstevr(
      LAPACK_COL_MAJOR, want_vectors ? 'V' : 'N', k == n ? 'A' : 'I', n,
      t.d.data(), t.e.data(), 0.0, 0.0, 1, k, 0.0, &m_found, w.data(),
      want_vectors ? zz.data() : nullptr, std::max<lapack_int>(1, n),
      isuppz.data());
  lapack_check(info, "dstevr");
  w.resize(m_found);
  if (want_vectors) z = zz.leftCols(m_found);
}

// Lanczos with full reorthogonalization; returns the k lowest Ritz pairs.
// Deterministic start vector (fixed seed).
inline void lanczos_lowest(const SymMatrix& m, std::size_t k,
                           bool want_vectors, std::vector<double>& w,
                           Eigen::MatrixXd& z) {
  const std::size_t n = m.dim;
  const std::size_t max_iter = std::min<std::size_t>(n, 40 * k + 260);
  std::mt19937_64 rng(0x5eedULL);
  std::normal_distribution<double> gauss;

  std::vector<std::vector<double>> basis;
  std::vector<double> alpha, beta;
  std::vector<double> v(n), work(n);
  for (double& x : v) x = gauss(rng);
  double nrm = 0.0;
  for (double x : v) nrm += x * x;
  nrm = std::sqrt(nrm);
  for (double& x : v) x /= nrm;
  basis.push_back(v);

  double scale = 1.0;
  for (const auto& e : m.entries) scale = std::max(scale, std::abs(e.value));

  std::vector<double> ritz_prev;
  for (std::size_t it = 0; it < max_iter; ++it) {
    m.multiply(basis.back(), work);
    // full reorthogonalization, twice for safety
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t b = 0; b < basis.size(); ++b) {
        double dot = 0.0;
        const auto& q = basis[b];
        for (std::size_t i = 0; i < n; ++i) dot += work[i] * q[i];
        if (pass == 0 && b + 1 == basis.size()) alpha.push_back(dot);
        for (std::size_t i = 0; i < n; ++i) work[i] -= dot * q[i];
      }
    }
    double b_next = 0.0;
    for (double x : work) b_next += x * x;
    b_next = std::sqrt(b_next);

    const bool breakdown = b_next < 1e-13 * scale;
    const bool check_now = breakdown || basis.size() >= max_iter ||
                           (basis.size() >= k + 2 && basis.size() % 10 == 0);
    if (check_now) {
      Tridiag t;
      t.d = alpha;
      t.e = beta;
      std::vector<double> ritz;
      Eigen::MatrixXd dummy;
      const lapack_int kk =
          std::min<lapack_int>(static_cast<lapack_int>(k),
                               static_cast<lapack_int>(alpha.size()));
      stevr_lowest(t, kk, false, ritz, dummy);
      bool converged = breakdown && basis.size() >= k;
      if (!converged && ritz_prev.size() == ritz.size() && ritz.size() == k) {
        converged = true;
        for (std::size_t i = 0; i < k; ++i)
          if (std::abs(ritz[i] - ritz_prev[i]) > 1e-12 * scale)
            converged = false;
      }
      ritz_prev = ritz;
      if (converged || basis.size() >= max_iter || breakdown) {
        Tridiag tf;
        tf.d = alpha;
        tf.e = beta;
        Eigen::MatrixXd s;
        stevr_lowest(tf, kk, want_vectors, w, s);
        if (want_vectors) {
          z.resize(n, s.cols());
          z.setZero();
          for (Eigen::Index c = 0; c < s.cols(); ++c)
            for (std::size_t b = 0; b < alpha.size(); ++b)
              for (std::size_t i = 0; i < n; ++i)
                z(i, c) += s(b, c) * basis[b][i];
          for (Eigen::Index c = 0; c < z.cols(); ++c) z.col(c).normalize();
        }
        return;
      }
    }
    if (breakdown) return;  // unreachable; handled above
    beta.push_back(b_next);
    for (double& x : work) x /= b_next;
    basis.push_back(work);
  }
}

inline std::vector<Parity> uniform_labels(std::size_t dim, Parity p) {
  return std::vector<Parity>(dim, p);
}

}  // namespace detail

// All eigenvalues in ascending order; eigenvectors on request. Full-basis
// diagonalization is intended for dim <= ~30000; above that use lowest_k.
inline Spectrum full_spectrum(const SymMatrix& m, bool want_vectors = false) {
  if (m.dim < 1) throw std::invalid_argument("full_spectrum: empty matrix");
  detail::check_finite(m);
  Spectrum s;
  const lapack_int n = static_cast<lapack_int>(m.dim);
  const std::size_t kd = m.bandwidth();
  if (!want_vectors && kd * 4 < m.dim) {
    // banded path: dominant cost ~ 6 n^2 kd instead of n^3
    std::vector<double> ab = detail::to_band(m, kd);
    s.energies.assign(m.dim, 0.0);
    lapack_int info = LAPACKE_dsbevd(
        LAPACK_COL_MAJOR, 'N', 'L', n, static_cast<lapack_int>(kd), ab.data(),
        static_cast<lapack_int>(kd + 1), s.energies.data(), nullptr, 1);
    detail::lapack_check(info, "dsbevd");
  } else {
    Eigen::MatrixXd a = detail::to_dense(m);
    s.energies.assign(m.dim, 0.0);
    lapack_int info =
        LAPACKE_dsyevd(LAPACK_COL_MAJOR, want_vectors ? 'V' : 'N', 'L', n,
                       a.data(), n, s.energies.data());
    detail::lapack_check(info, "dsyevd");
    if (want_vectors) s.vectors = std::move(a);
  }
  return s;
}

// The k smallest eigenvalues (and optionally vectors).
inline Spectrum lowest_k(const SymMatrix& m, std::size_t k,
                         bool want_vectors = false) {
  if (k < 1 || k > m.dim)
    throw std::invalid_argument("lowest_k: k out of range");
  detail::check_finite(m);
  if (k == m.dim) return full_spectrum(m, want_vectors);

  Spectrum s;
  const std::size_t kd = m.bandwidth();
  if (kd <= 1) {
    detail::stevr_lowest(detail::to_tridiag(m), static_cast<lapack_int>(k),
                         want_vectors, s.energies, s.vectors);
  } else if (m.dim <= 1200) {
    Eigen::MatrixXd a = detail::to_dense(m);
    const lapack_int n = static_cast<lapack_int>(m.dim);
    std::vector<double> w(m.dim);
    lapack_int found = 0;
    std::vector<lapack_int> isuppz(2 * k);
    Eigen::MatrixXd z;
    if (want_vectors) z.resize(n, static_cast<lapack_int>(k));
    lapack_int info = LAPACKE_dsyevr(
        LAPACK_COL_MAJOR, want_vectors ? 'V' : 'N', 'I', 'L', n, a.data(), n,
        0.0, 0.0, 1, static_cast<lapack_int>(k), 0.0, &found, w.data(),
        want_vectors ? z.data() : nullptr, n, isuppz.data());
    detail::lapack_check(info, "dsyevr");
    w.resize(found);
    s.energies = std::move(w);
    if (want_vectors) s.vectors = z.leftCols(found);
  } else {
    detail::lanczos_lowest(m, k, want_vectors, s.energies, s.vectors);
  }
  return s;
}

// Merge two parity-labeled sector spectra into one ascending list.
// Degenerate ties are broken Even before Odd for determinism. Vectors are
// dropped (they live in different bases).
inline Spectrum merge_sectors(const Spectrum& even, const Spectrum& odd) {
  if (even.n_particles != odd.n_particles && !odd.energies.empty() &&
      !even.energies.empty())
    throw std::invalid_argument("merge_sectors: mismatched N");
  struct Lev {
    double e;
    Parity p;
  };
  std::vector<Lev> all;
  all.reserve(even.energies.size() + odd.energies.size());
  for (double e : even.energies) all.push_back({e, Parity::Even});
  for (double e : odd.energies) all.push_back({e, Parity::Odd});
  std::stable_sort(all.begin(), all.end(), [](const Lev& a, const Lev& b) {
    if (a.e != b.e) return a.e < b.e;
    return a.p == Parity::Even && b.p == Parity::Odd;
  });
  Spectrum s;
  s.n_particles = even.energies.empty() ? odd.n_particles : even.n_particles;
  s.energies.reserve(all.size());
  s.labels.reserve(all.size());
  for (const Lev& l : all) {
    s.energies.push_back(l.e);
    s.labels.push_back(l.p);
  }
  return s;
}

}  // namespace dwell
