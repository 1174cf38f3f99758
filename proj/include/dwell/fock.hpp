#pragma once

// Number-conserving Fock bases for the two-well atom gas and its
// atom-molecule extension, plus the left/right parity decomposition.

#include <compare>
#include <cstddef>
#include <map>
#include <stdexcept>
#include <vector>

namespace dwell {

enum class Model { AtomsOnly, AtomsMolecule };

enum class Parity { Even, Odd };

// Occupation triple |n_left, n_right, n_mol>. The enclosing basis fixes
// N = n_left + n_right + 2 n_mol; n_mol is 0 for Model::AtomsOnly.
struct FockState {
  int n_left = 0;
  int n_right = 0;
  int n_mol = 0;

  friend auto operator<=>(const FockState&, const FockState&) = default;

  int total() const { return n_left + n_right + 2 * n_mol; }
};

// Swaps the two wells; the molecule count is untouched. Involution.
inline FockState apply_parity(const FockState& s) {
  return FockState{s.n_right, s.n_left, s.n_mol};
}

namespace detail {

class StateIndex {
 public:
  StateIndex() = default;
  explicit StateIndex(const std::vector<FockState>& states) {
    for (std::size_t i = 0; i < states.size(); ++i) map_.emplace(states[i], i);
  }

  // Position of s, or npos when s is not a member.
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
  std::size_t find(const FockState& s) const {
    auto it = map_.find(s);
    return it == map_.end() ? npos : it->second;
  }

 private:
  std::map<FockState, std::size_t> map_;
};

}  // namespace detail

// Ordered basis of the full fixed-N Hilbert space. Canonical order is
// descending n_mol, then descending n_left; this ordering is part of the
// file-format contract and also keeps both Hamiltonians narrow-banded.
struct FullBasis {
  int n = 0;
  Model model = Model::AtomsOnly;
  std::vector<FockState> states;
  detail::StateIndex index;

  std::size_t dimension() const { return states.size(); }
  std::size_t index_of(const FockState& s) const { return index.find(s); }
};

// One parity block. States are symmetrized pair representatives; the
// canonical representative is the member with n_left >= n_right. The Even
// sector additionally holds every self-symmetric state (n_left == n_right).
struct SectorBasis {
  Parity parity = Parity::Even;
  int n = 0;
  Model model = Model::AtomsOnly;
  std::vector<FockState> states;
  detail::StateIndex index;

  std::size_t dimension() const { return states.size(); }
  std::size_t index_of(const FockState& s) const { return index.find(s); }

  static bool self_symmetric(const FockState& s) {
    return s.n_left == s.n_right;
  }
};

inline FullBasis build_basis(int n, Model model) {
  if (n < 0) throw std::invalid_argument("build_basis: N must be >= 0");
  FullBasis basis;
  basis.n = n;
  basis.model = model;
  const int m_max = (model == Model::AtomsMolecule) ? n / 2 : 0;
  for (int m = m_max; m >= 0; --m) {
    const int atoms = n - 2 * m;
    for (int nl = atoms; nl >= 0; --nl)
      basis.states.push_back(FockState{nl, atoms - nl, m});
  }
  basis.index = detail::StateIndex(basis.states);
  return basis;
}

inline std::pair<SectorBasis, SectorBasis> split_parity(const FullBasis& b) {
  SectorBasis even, odd;
  even.parity = Parity::Even;
  odd.parity = Parity::Odd;
  even.n = odd.n = b.n;
  even.model = odd.model = b.model;
  for (const FockState& s : b.states) {
    if (s.n_left < s.n_right) continue;  // its mirror is the representative
    even.states.push_back(s);
    if (!SectorBasis::self_symmetric(s)) odd.states.push_back(s);
  }
  even.index = detail::StateIndex(even.states);
  odd.index = detail::StateIndex(odd.states);
  return {std::move(even), std::move(odd)};
}

}  // namespace dwell
