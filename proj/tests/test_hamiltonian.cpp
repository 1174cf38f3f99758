#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "dwell/fock.hpp"
#include "dwell/hamiltonian.hpp"
#include "dwell/spectra.hpp"

using namespace dwell;
using Catch::Matchers::WithinAbs;

namespace {

Eigen::MatrixXd dense(const SymMatrix& m) { return detail::to_dense(m); }

// Full-basis parity permutation matrix.
Eigen::MatrixXd parity_matrix(const FullBasis& b) {
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(b.dimension(), b.dimension());
  for (std::size_t i = 0; i < b.dimension(); ++i)
    p(b.index_of(apply_parity(b.states[i])), i) = 1.0;
  return p;
}

SymMatrix model_matrix(const FullBasis& b, const ModelParams& p) {
  return b.model == Model::AtomsOnly ? build_h1(b, p) : build_h2(b, p);
}

SymMatrix model_matrix(const SectorBasis& b, const ModelParams& p) {
  return b.model == Model::AtomsOnly ? build_h1(b, p) : build_h2(b, p);
}

}  // namespace

TEST_CASE("H1 for N=2 in the full basis") {
  const FullBasis basis = build_basis(2, Model::AtomsOnly);
  const double u = GENERATE(0.0, 1.0, -2.5, 9.0);
  const Eigen::MatrixXd h = dense(build_h1(basis, {1.0, u}));
  Eigen::MatrixXd expected(3, 3);
  const double s2 = std::sqrt(2.0);
  expected << u, -s2, 0.0, -s2, 0.0, -s2, 0.0, -s2, u;
  CHECK((h - expected).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("H1 for N=2 in the parity sectors") {
  auto [even, odd] = split_parity(build_basis(2, Model::AtomsOnly));
  const double u = 0.7;
  const Eigen::MatrixXd he = dense(build_h1(even, {1.0, u}));
  Eigen::MatrixXd expected_even(2, 2);
  expected_even << u, -2.0, -2.0, 0.0;
  CHECK((he - expected_even).cwiseAbs().maxCoeff() < 1e-14);

  const Eigen::MatrixXd ho = dense(build_h1(odd, {1.0, u}));
  REQUIRE(ho.rows() == 1);
  CHECK_THAT(ho(0, 0), WithinAbs(u, 1e-14));
}

TEST_CASE("J -> 0 limit is diagonal with the interaction energies") {
  const FullBasis basis = build_basis(5, Model::AtomsOnly);
  const double u = 3.0;
  const Eigen::MatrixXd h = dense(build_h1(basis, {1e-300, u}));
  for (std::size_t i = 0; i < basis.dimension(); ++i) {
    const FockState& s = basis.states[i];
    const double expect =
        u / 5.0 *
        (s.n_left * (s.n_left - 1.0) + s.n_right * (s.n_right - 1.0));
    CHECK_THAT(h(i, i), WithinAbs(expect, 1e-12));
    for (std::size_t j = 0; j < basis.dimension(); ++j)
      if (i != j) CHECK(std::abs(h(i, j)) < 1e-290);
  }
}

TEST_CASE("H2 molecular coupling elements for N=2") {
  const FullBasis basis = build_basis(2, Model::AtomsMolecule);
  REQUIRE(basis.dimension() == 4);
  const ModelParams p{1.0, 0.0, 5.0, 5.0};
  const Eigen::MatrixXd h = dense(build_h2(basis, p));
  const auto i_mol = basis.index_of(FockState{0, 0, 1});
  const auto i_20 = basis.index_of(FockState{2, 0, 0});
  CHECK_THAT(h(i_mol, i_20), WithinAbs(-5.0 / std::sqrt(2.0), 1e-14));
  CHECK_THAT(h(i_mol, i_mol), WithinAbs(5.0, 1e-14));
}

TEST_CASE("g=0 decouples the molecule blocks") {
  const FullBasis mixture = build_basis(6, Model::AtomsMolecule);
  const ModelParams p{1.0, -1.3, 7.0, 0.0};
  const Eigen::MatrixXd h = dense(build_h2(mixture, p));
  for (std::size_t i = 0; i < mixture.dimension(); ++i)
    for (std::size_t j = 0; j < mixture.dimension(); ++j)
      if (mixture.states[i].n_mol != mixture.states[j].n_mol)
        CHECK(h(i, j) == 0.0);

  // the n_mol = 0 block equals H1 of the pure atomic problem at same N
  const FullBasis atoms = build_basis(6, Model::AtomsOnly);
  const Eigen::MatrixXd h1 = dense(build_h1(atoms, {1.0, -1.3}));
  for (std::size_t i = 0; i < atoms.dimension(); ++i)
    for (std::size_t j = 0; j < atoms.dimension(); ++j) {
      const FockState& a = atoms.states[i];
      const FockState& b = atoms.states[j];
      CHECK_THAT(h(mixture.index_of(a), mixture.index_of(b)),
                 WithinAbs(h1(i, j), 1e-14));
    }
}

TEST_CASE("sector spectra reproduce the full spectrum") {
  const ModelParams p{1.0, 2.0, 5.0, 5.0};
  for (int n : {4, 6, 10}) {
    const FullBasis full = build_basis(n, Model::AtomsMolecule);
    auto [even, odd] = split_parity(full);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ref(
        dense(build_h2(full, p)));
    std::vector<double> merged;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> se(
        dense(build_h2(even, p)));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> so(dense(build_h2(odd, p)));
    for (Eigen::Index i = 0; i < se.eigenvalues().size(); ++i)
      merged.push_back(se.eigenvalues()(i));
    for (Eigen::Index i = 0; i < so.eigenvalues().size(); ++i)
      merged.push_back(so.eigenvalues()(i));
    std::sort(merged.begin(), merged.end());
    REQUIRE(merged.size() == full.dimension());
    for (std::size_t i = 0; i < merged.size(); ++i)
      CHECK_THAT(merged[i], WithinAbs(ref.eigenvalues()(i), 1e-10));
  }
}

TEST_CASE("[H, P] = 0 on random parameter draws, both models") {
  std::mt19937 rng(20240817);
  std::uniform_real_distribution<double> dist(-4.0, 4.0);
  for (int rep = 0; rep < 8; ++rep) {
    ModelParams p{std::abs(dist(rng)) + 0.1, dist(rng), std::abs(dist(rng)),
                  std::abs(dist(rng))};
    for (Model model : {Model::AtomsOnly, Model::AtomsMolecule}) {
      const FullBasis basis = build_basis(8, model);
      const Eigen::MatrixXd h = dense(model_matrix(basis, p));
      const Eigen::MatrixXd par = parity_matrix(basis);
      CHECK((par * h * par - h).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("assembly never leaves the fixed-N manifold") {
  const FullBasis basis = build_basis(10, Model::AtomsMolecule);
  std::vector<detail::Component> comps;
  for (const FockState& s : basis.states) {
    detail::apply_hamiltonian(s, {1.0, 2.0, 5.0, 5.0}, basis.n,
                              Model::AtomsMolecule, comps);
    for (const auto& c : comps) CHECK(c.state.total() == 10);
  }
}

TEST_CASE("stored triangle is the upper one") {
  const SymMatrix m =
      build_h2(build_basis(8, Model::AtomsMolecule), {1.0, 1.0, 5.0, 5.0});
  for (const auto& e : m.entries) {
    CHECK(e.row <= e.col);
    CHECK(std::isfinite(e.value));
  }
}

TEST_CASE("imbalance matrix is diagonal n_R - n_L in the full basis") {
  const FullBasis basis = build_basis(2, Model::AtomsMolecule);
  const Eigen::MatrixXd imb = dense(imbalance_matrix(basis));
  CHECK_THAT(imb(basis.index_of(FockState{2, 0, 0}),
                 basis.index_of(FockState{2, 0, 0})),
             WithinAbs(-2.0, 1e-15));
  CHECK_THAT(imb(basis.index_of(FockState{1, 1, 0}),
                 basis.index_of(FockState{1, 1, 0})),
             WithinAbs(0.0, 1e-15));
}

TEST_CASE("imbalance expectation vanishes in parity eigenstates (N=4)") {
  const ModelParams p{1.0, 1.5, 5.0, 5.0};
  const FullBasis full = build_basis(4, Model::AtomsMolecule);
  const Eigen::MatrixXd h = dense(build_h2(full, p));
  const Eigen::MatrixXd imb = dense(imbalance_matrix(full));
  const Eigen::MatrixXd par = parity_matrix(full);
  // simultaneous eigenbasis of H and P: diagonalize H + small*P
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h + 1e-6 * par);
  for (Eigen::Index k = 0; k < solver.eigenvectors().cols(); ++k) {
    const Eigen::VectorXd v = solver.eigenvectors().col(k);
    CHECK(std::abs(v.dot(imb * v)) < 1e-10);
  }
}

TEST_CASE("model mismatch is rejected") {
  const FullBasis atoms = build_basis(4, Model::AtomsOnly);
  const FullBasis mixture = build_basis(4, Model::AtomsMolecule);
  CHECK_THROWS_AS(build_h2(atoms, ModelParams{}), std::invalid_argument);
  CHECK_THROWS_AS(build_h1(mixture, ModelParams{}), std::invalid_argument);
}
