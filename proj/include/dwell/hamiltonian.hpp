#pragma once

// Sparse symmetric assembly of the two-site Bose-Hubbard Hamiltonian and
// its two-channel atom-molecule extension, in a full basis or directly in
// a parity sector.

#include <cmath>
#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

#include "dwell/fock.hpp"

namespace dwell {

// J is the energy unit (J > 0). omega and g are ignored by the
// atoms-only model.
struct ModelParams {
  double j = 1.0;
  double u = 0.0;
  double omega = 0.0;
  double g = 0.0;
};

// Real symmetric sparse matrix; only the upper triangle (row <= col) is
// stored, so symmetry holds by construction.
struct SymMatrix {
  struct Entry {
    std::size_t row;
    std::size_t col;
    double value;
  };

  std::size_t dim = 0;
  std::vector<Entry> entries;

  double trace() const {
    double t = 0.0;
    for (const Entry& e : entries)
      if (e.row == e.col) t += e.value;
    return t;
  }

  // Largest |row - col| over stored entries.
  std::size_t bandwidth() const {
    std::size_t bw = 0;
    for (const Entry& e : entries) bw = std::max(bw, e.col - e.row);
    return bw;
  }

  // y = A x with the symmetric completion of the stored triangle.
  void multiply(const std::vector<double>& x, std::vector<double>& y) const {
    y.assign(dim, 0.0);
    for (const Entry& e : entries) {
      y[e.row] += e.value * x[e.col];
      if (e.row != e.col) y[e.col] += e.value * x[e.row];
    }
  }
};

namespace detail {

// One term of H applied to a Fock state: amplitude on a target state.
struct Component {
  FockState state;
  double amplitude;
};

// Expansion of H|s> over Fock states. Matrix elements use exact integer
// occupations with a single square-root evaluation each.
inline void apply_hamiltonian(const FockState& s, const ModelParams& p, int n,
                              Model model, std::vector<Component>& out) {
  out.clear();
  const double nl = s.n_left;
  const double nr = s.n_right;

  double diag = (p.u / n) * (nl * (nl - 1.0) + nr * (nr - 1.0));
  if (model == Model::AtomsMolecule) diag += p.omega * s.n_mol;
  out.push_back({s, diag});

  // -J a_L^dag a_R
  if (s.n_right > 0)
    out.push_back({FockState{s.n_left + 1, s.n_right - 1, s.n_mol},
                   -p.j * std::sqrt((nl + 1.0) * nr)});
  // -J a_R^dag a_L
  if (s.n_left > 0)
    out.push_back({FockState{s.n_left - 1, s.n_right + 1, s.n_mol},
                   -p.j * std::sqrt(nl * (nr + 1.0))});

  if (model == Model::AtomsMolecule && p.g != 0.0) {
    const double c = p.g / std::sqrt(2.0 * n);
    const double nm = s.n_mol;
    // -g/sqrt(2N) b^dag a_k a_k
    if (s.n_left >= 2)
      out.push_back({FockState{s.n_left - 2, s.n_right, s.n_mol + 1},
                     -c * std::sqrt((nm + 1.0) * nl * (nl - 1.0))});
    if (s.n_right >= 2)
      out.push_back({FockState{s.n_left, s.n_right - 2, s.n_mol + 1},
                     -c * std::sqrt((nm + 1.0) * nr * (nr - 1.0))});
    // -g/sqrt(2N) a_k^dag a_k^dag b
    if (s.n_mol > 0) {
      out.push_back({FockState{s.n_left + 2, s.n_right, s.n_mol - 1},
                     -c * std::sqrt(nm * (nl + 2.0) * (nl + 1.0))});
      out.push_back({FockState{s.n_left, s.n_right + 2, s.n_mol - 1},
                     -c * std::sqrt(nm * (nr + 2.0) * (nr + 1.0))});
    }
  }
}

class SymAccumulator {
 public:
  explicit SymAccumulator(std::size_t dim) { m_.dim = dim; }

  void add(std::size_t i, std::size_t j, double v) {
    if (v == 0.0) return;
    if (i > j) std::swap(i, j);
    acc_[{i, j}] += v;
  }

  SymMatrix take() {
    for (const auto& [key, v] : acc_)
      m_.entries.push_back({key.first, key.second, v});
    acc_.clear();
    return std::move(m_);
  }

 private:
  SymMatrix m_;
  std::map<std::pair<std::size_t, std::size_t>, double> acc_;
};

inline void check_model(Model basis_model, Model expected, const char* op) {
  if (basis_model != expected)
    throw std::invalid_argument(std::string(op) +
                                ": basis built for the wrong model");
}

inline SymMatrix assemble_full(const FullBasis& basis, const ModelParams& p) {
  SymAccumulator acc(basis.dimension());
  std::vector<Component> comps;
  for (std::size_t i = 0; i < basis.dimension(); ++i) {
    apply_hamiltonian(basis.states[i], p, basis.n, basis.model, comps);
    for (const Component& c : comps) {
      const std::size_t j = basis.index_of(c.state);
      if (j >= i) acc.add(i, j, c.amplitude);  // upper triangle once
    }
  }
  return acc.take();
}

// Sector matrices are built in the symmetrized basis itself, never by
// projecting the full matrix. For a pair representative a the sector state
// is (|a> +- |Pa>)/sqrt(2); self-symmetric states enter the Even sector
// unscaled.
inline SymMatrix assemble_sector(const SectorBasis& basis,
                                 const ModelParams& p) {
  const double sign = (basis.parity == Parity::Even) ? 1.0 : -1.0;
  SymAccumulator acc(basis.dimension());
  std::vector<Component> comps;
  std::vector<Component> expansion;
  for (std::size_t i = 0; i < basis.dimension(); ++i) {
    const FockState& a = basis.states[i];
    const bool a_self = SectorBasis::self_symmetric(a);
    const double ca = a_self ? 1.0 : 1.0 / std::sqrt(2.0);

    // H applied to the symmetrized state, expanded over full Fock states.
    apply_hamiltonian(a, p, basis.n, basis.model, comps);
    expansion.clear();
    for (const Component& c : comps) {
      expansion.push_back({c.state, ca * c.amplitude});
      if (!a_self)
        expansion.push_back({apply_parity(c.state), sign * ca * c.amplitude});
    }

    for (const Component& c : expansion) {
      const FockState rep = (c.state.n_left >= c.state.n_right)
                                ? c.state
                                : apply_parity(c.state);
      const std::size_t j = basis.index_of(rep);
      if (j == detail::StateIndex::npos) continue;  // self state, Odd sector
      const bool b_self = SectorBasis::self_symmetric(rep);
      double proj = b_self ? 1.0 : 1.0 / std::sqrt(2.0);
      if (!b_self && !(c.state == rep)) proj *= sign;
      if (j >= i) acc.add(i, j, proj * c.amplitude);
    }
  }
  return acc.take();
}

}  // namespace detail

// Two-site Bose-Hubbard matrix over a full basis.
inline SymMatrix build_h1(const FullBasis& basis, const ModelParams& p) {
  detail::check_model(basis.model, Model::AtomsOnly, "build_h1");
  if (basis.n < 1) throw std::invalid_argument("build_h1: N must be >= 1");
  if (p.j <= 0.0) throw std::invalid_argument("build_h1: J must be > 0");
  return detail::assemble_full(basis, p);
}

inline SymMatrix build_h1(const SectorBasis& basis, const ModelParams& p) {
  detail::check_model(basis.model, Model::AtomsOnly, "build_h1");
  if (basis.n < 1) throw std::invalid_argument("build_h1: N must be >= 1");
  if (p.j <= 0.0) throw std::invalid_argument("build_h1: J must be > 0");
  return detail::assemble_sector(basis, p);
}

// Two-channel atom-molecule matrix.
inline SymMatrix build_h2(const FullBasis& basis, const ModelParams& p) {
  detail::check_model(basis.model, Model::AtomsMolecule, "build_h2");
  if (p.j <= 0.0) throw std::invalid_argument("build_h2: J must be > 0");
  return detail::assemble_full(basis, p);
}

inline SymMatrix build_h2(const SectorBasis& basis, const ModelParams& p) {
  detail::check_model(basis.model, Model::AtomsMolecule, "build_h2");
  if (p.j <= 0.0) throw std::invalid_argument("build_h2: J must be > 0");
  return detail::assemble_sector(basis, p);
}

// Population imbalance n_R - n_L; diagonal in the full basis. It does not
// commute with parity, so a sector basis is rejected.
inline SymMatrix imbalance_matrix(const FullBasis& basis) {
  SymMatrix m;
  m.dim = basis.dimension();
  for (std::size_t i = 0; i < basis.dimension(); ++i) {
    const FockState& s = basis.states[i];
    if (s.n_right != s.n_left)
      m.entries.push_back({i, i, double(s.n_right - s.n_left)});
  }
  return m;
}

}  // namespace dwell
