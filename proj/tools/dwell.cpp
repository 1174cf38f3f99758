// dwell: spectra, mean-field theory and criticality diagnostics for the
// two-well Bose gas and its atom-molecule extension. Every command writes
// CSV/JSON files with a full parameter-provenance header; identical
// invocations produce byte-identical output.

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "dwell/criticality.hpp"
#include "dwell/fluctuations.hpp"
#include "dwell/fock.hpp"
#include "dwell/hamiltonian.hpp"
#include "dwell/io.hpp"
#include "dwell/meanfield.hpp"
#include "dwell/observables.hpp"
#include "dwell/spectra.hpp"

extern "C" void openblas_set_num_threads(int);

namespace {

using namespace dwell;

constexpr std::size_t kDimCap = 30000;

struct Globals {
  int threads = 1;
  std::string out_dir = ".";
  unsigned long seed = 24105;
  bool allow_large = false;
};

struct CommonOpts {
  std::string model_name = "atoms";
  int n = 0;
  double j = 1.0;
  double u = 0.0;
  double omega = 0.0;
  double g = 0.0;
  std::string parity = "full";
  // grid spec lo:hi:step; empty means single-U
  std::string u_grid;
};

Model parse_model(const std::string& name) {
  if (name == "atoms") return Model::AtomsOnly;
  if (name == "mixture") return Model::AtomsMolecule;
  throw CLI::ValidationError("--model", "expected 'atoms' or 'mixture'");
}

ModelParams params_of(const CommonOpts& o) {
  return ModelParams{o.j, o.u, o.omega, o.g};
}

std::vector<double> parse_grid(const CommonOpts& o) {
  if (o.u_grid.empty()) return {o.u};
  double lo, hi, step;
  char c1, c2;
  std::istringstream is(o.u_grid);
  if (!(is >> lo >> c1 >> hi >> c2 >> step) || c1 != ':' || c2 != ':' ||
      step <= 0.0 || hi < lo)
    throw CLI::ValidationError("--u-grid", "expected lo:hi:step with step > 0");
  std::vector<double> grid;
  for (int i = 0;; ++i) {
    const double u = lo + i * step;
    if (u > hi + 1e-12) break;
    grid.push_back(u);
  }
  return grid;
}

// The largest block a command will diagonalize in full; refusal above the
// cap unless --allow-large is set.
void check_cap(const Globals& g, std::size_t dim) {
  if (g.allow_large || dim <= kDimCap) return;
  std::cerr << "refusing full diagonalization at dimension " << dim
            << " (cap " << kDimCap << "); rerun with --allow-large\n";
  std::exit(3);
}

std::ofstream open_out(const Globals& g, const std::string& name,
                       std::string& path_out) {
  path_out = g.out_dir + "/" + name;
  std::ofstream os(path_out);
  if (!os) {
    std::cerr << "cannot open " << path_out << " for writing\n";
    std::exit(3);
  }
  return os;
}

void done(const std::string& path) { std::cout << path << "\n"; }

SymMatrix build_matrix(const FullBasis& b, const ModelParams& p) {
  return b.model == Model::AtomsOnly ? build_h1(b, p) : build_h2(b, p);
}

SymMatrix build_matrix(const SectorBasis& b, const ModelParams& p) {
  return b.model == Model::AtomsOnly ? build_h1(b, p) : build_h2(b, p);
}

// Merged-parity full spectrum with the cap applied to the larger sector.
Spectrum merged_spectrum(const Globals& g, const ModelParams& p, Model model,
                         int n) {
  const FullBasis full = build_basis(n, model);
  auto [even, odd] = split_parity(full);
  check_cap(g, even.dimension());
  Spectrum se = full_spectrum(build_matrix(even, p));
  Spectrum so;
  if (odd.dimension() > 0) so = full_spectrum(build_matrix(odd, p));
  se.n_particles = so.n_particles = n;
  return merge_sectors(se, so);
}

std::string describe(const CommonOpts& o, const std::string& extra = "") {
  std::string s = "model=" + o.model_name + " n=" + std::to_string(o.n);
  if (!o.u_grid.empty()) s += " u-grid=" + o.u_grid;
  if (!extra.empty()) s += " " + extra;
  return s;
}

// ---------------------------------------------------------------- basis

int run_basis(const Globals& g, const CommonOpts& o) {
  const Model model = parse_model(o.model_name);
  const FullBasis full = build_basis(o.n, model);
  std::string path;
  std::ofstream os = open_out(g, "basis.csv", path);
  write_provenance(os, "basis " + describe(o, "parity=" + o.parity), model,
                   params_of(o));
  os << "index,n_left,n_right,n_mol\n";
  auto dump = [&](const std::vector<FockState>& states) {
    for (std::size_t i = 0; i < states.size(); ++i)
      os << i << "," << states[i].n_left << "," << states[i].n_right << ","
         << states[i].n_mol << "\n";
  };
  if (o.parity == "full") {
    dump(full.states);
  } else {
    auto [even, odd] = split_parity(full);
    dump(o.parity == "even" ? even.states : odd.states);
  }
  done(path);
  return 0;
}

// ---------------------------------------------------------- hamiltonian

int run_hamiltonian(const Globals& g, const CommonOpts& o) {
  const Model model = parse_model(o.model_name);
  const ModelParams p = params_of(o);
  const FullBasis full = build_basis(o.n, model);
  SymMatrix m;
  if (o.parity == "full") {
    m = build_matrix(full, p);
  } else {
    auto [even, odd] = split_parity(full);
    m = build_matrix(o.parity == "even" ? even : odd, p);
  }
  std::string path;
  std::ofstream os = open_out(g, "hamiltonian.csv", path);
  write_provenance(os, "hamiltonian " + describe(o, "parity=" + o.parity),
                   model, p, {{"dimension", std::to_string(m.dim)}});
  os << "row,col,value\n";
  for (const auto& e : m.entries)
    os << e.row << "," << e.col << "," << format_double(e.value) << "\n";
  done(path);
  return 0;
}

// ------------------------------------------------------------- spectrum

int run_spectrum(const Globals& g, const CommonOpts& o, int levels) {
  const Model model = parse_model(o.model_name);
  const ModelParams p = params_of(o);
  std::string path;
  std::ofstream os = open_out(g, "spectrum.csv", path);
  write_provenance(os,
                   "spectrum " + describe(o, "parity=" + o.parity +
                                                 " levels=" +
                                                 std::to_string(levels)),
                   model, p);
  if (o.parity == "full" && levels == 0) {
    const Spectrum s = merged_spectrum(g, p, model, o.n);
    os << "index,energy,parity\n";
    for (std::size_t i = 0; i < s.energies.size(); ++i)
      os << i << "," << format_double(s.energies[i]) << ","
         << parity_name(s.labels[i]) << "\n";
  } else {
    const FullBasis full = build_basis(o.n, model);
    auto [even, odd] = split_parity(full);
    SymMatrix m;
    if (o.parity == "full")
      m = build_matrix(full, p);
    else
      m = build_matrix(o.parity == "even" ? even : odd, p);
    Spectrum s;
    if (levels > 0) {
      s = lowest_k(m, static_cast<std::size_t>(levels));
    } else {
      check_cap(g, m.dim);
      s = full_spectrum(m);
    }
    os << "index,energy\n";
    for (std::size_t i = 0; i < s.energies.size(); ++i)
      os << i << "," << format_double(s.energies[i]) << "\n";
  }
  done(path);
  return 0;
}

// ------------------------------------------------------------ meanfield

int run_meanfield(const Globals& g, const CommonOpts& o) {
  const Model model = parse_model(o.model_name);
  const ModelParams base = params_of(o);
  const double uc = critical_u(base, model);
  std::string path;
  std::ofstream os = open_out(g, "meanfield.csv", path);
  write_provenance(os, "meanfield " + describe(o), model, base,
                   {{"u_c", format_double(uc)}});
  os << "u,phase,beta,gamma_r,gamma_l,lambda,energy_pp\n";
  for (double u : parse_grid(o)) {
    ModelParams p = base;
    p.u = u;
    const VariationalPoint pt = ground_state(p, model);
    os << format_double(u) << ","
       << (pt.phase == Phase::Broken ? "broken" : "symmetric") << ","
       << format_double(pt.beta) << "," << format_double(pt.gamma_r) << ","
       << format_double(pt.gamma_l) << "," << format_double(pt.lambda) << ","
       << format_double(pt.energy_pp) << "\n";
  }
  done(path);
  return 0;
}

// ---------------------------------------------------------------- fluct

int run_fluct(const Globals& g, const CommonOpts& o) {
  const Model model = parse_model(o.model_name);
  const ModelParams base = params_of(o);
  std::string path;
  std::ofstream os = open_out(g, "fluct.csv", path);
  write_provenance(os, "fluct " + describe(o), model, base);
  os << "u,deltas,goldstone_index,gs_correction\n";
  for (double u : parse_grid(o)) {
    ModelParams p = base;
    p.u = u;
    try {
      const VariationalPoint pt = ground_state(p, model);
      const FluctuationSpectrum fs = excitations(build_blocks(pt, p, model));
      os << format_double(u) << ",";
      for (std::size_t i = 0; i < fs.deltas.size(); ++i)
        os << (i ? ";" : "") << format_double(fs.deltas[i]);
      os << "," << fs.goldstone_index << ","
         << format_double(fs.gs_correction) << "\n";
    } catch (const InstabilityError&) {
      os << format_double(u) << ",unstable,," << "\n";
    }
  }
  done(path);
  return 0;
}

// ---------------------------------------------------------- observables

int run_observables(const Globals& g, const CommonOpts& o,
                    const std::string& what, int window, int stride,
                    double rel_tol, double bin_width) {
  const Model model = parse_model(o.model_name);
  const ModelParams p = params_of(o);
  const std::string extra =
      "what=" + what + " parity=" + o.parity;

  if (what == "fisher") {
    const FullBasis full = build_basis(o.n, model);
    auto [even, odd] = split_parity(full);
    const Spectrum s = lowest_k(build_matrix(even, p), 1, true);
    const double f = fisher(sector_to_full(s.vectors.col(0), even, full), full);
    std::string path;
    std::ofstream os = open_out(g, "fisher.csv", path);
    write_provenance(os, "observables " + describe(o, extra), model, p);
    os << "u,f_qfi,sqrt_f_over_n\n";
    os << format_double(o.u) << "," << format_double(f) << ","
       << format_double(std::sqrt(f) / o.n) << "\n";
    done(path);
    return 0;
  }
  if (what == "gap") {
    std::string path;
    std::ofstream os = open_out(g, "gap.csv", path);
    write_provenance(os, "observables " + describe(o, extra), model, p);
    os << "u,gap\n";
    for (double u : parse_grid(o)) {
      ModelParams q = p;
      q.u = u;
      os << format_double(u) << "," << format_double(gs_gap(q, model, o.n))
         << "\n";
    }
    done(path);
    return 0;
  }
  if (what == "degeneracy" || what == "dos" || what == "eta") {
    Spectrum spec;
    if (what == "eta" && o.parity != "full") {
      const FullBasis full = build_basis(o.n, model);
      auto [even, odd] = split_parity(full);
      const SectorBasis& sec = o.parity == "even" ? even : odd;
      check_cap(g, sec.dimension());
      spec = full_spectrum(build_matrix(sec, p));
      spec.n_particles = o.n;
    } else {
      spec = merged_spectrum(g, p, model, o.n);
    }
    std::string path;
    std::ofstream os = open_out(g, what + ".csv", path);
    write_provenance(os, "observables " + describe(o, extra), model, p);
    if (what == "degeneracy") {
      const DegeneracyProfile prof =
          degeneracy_profile(spec, window, stride, rel_tol);
      os << "energy_pp,fraction\n";
      for (const auto& pt : prof.points)
        os << format_double(pt.energy_pp) << "," << format_double(pt.fraction)
           << "\n";
    } else if (what == "dos") {
      const DosHistogram h = dos_histogram(spec, bin_width);
      os << "center_pp,count\n";
      for (const auto& b : h.bins)
        os << format_double(b.center) << "," << format_double(b.count) << "\n";
    } else {
      const ChaosProfile prof = eta_profile(spec, window > 0 ? window : 250,
                                            stride > 0 ? stride : 50);
      os << "energy_pp,eta\n";
      for (const auto& pt : prof.points)
        os << format_double(pt.energy_pp) << "," << format_double(pt.eta)
           << "\n";
    }
    done(path);
    return 0;
  }
  if (what == "calibrate-eta") {
    // sampled sanity check of the chaos metric; the only seeded path
    std::mt19937 rng(static_cast<std::uint32_t>(g.seed));
    std::exponential_distribution<double> exp1(1.0);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::vector<double> poisson(10000), wigner(10000);
    for (double& x : poisson) x = exp1(rng);
    for (double& x : wigner)
      x = std::sqrt(-4.0 * std::log1p(-uni(rng)) / M_PI);
    std::string path;
    std::ofstream os = open_out(g, "calibrate-eta.csv", path);
    write_provenance(os, "observables " + describe(o, extra), model, p,
                     {{"seed", std::to_string(g.seed)}});
    os << "ensemble,eta\n";
    os << "poisson," << format_double(eta_from_spacings(std::move(poisson)))
       << "\n";
    os << "wigner," << format_double(eta_from_spacings(std::move(wigner)))
       << "\n";
    done(path);
    return 0;
  }
  std::cerr << "unknown --what '" << what
            << "' (fisher, gap, degeneracy, dos, eta, calibrate-eta)\n";
  return 2;
}

// ------------------------------------------------------------- scan-qpt

int run_scan_qpt(const Globals& g, const CommonOpts& o,
                 const std::vector<int>& sizes, double gap_bound) {
  const Model model = parse_model(o.model_name);
  const ModelParams p = params_of(o);
  const double uc = critical_u(p, model);
  std::vector<std::pair<double, double>> samples;
  for (int n : sizes)
    samples.push_back({double(n), precursor_u(n, p, model, gap_bound)});

  std::string path;
  std::ofstream os = open_out(g, "scan-qpt.csv", path);
  write_provenance(os, "scan-qpt " + describe(o), model, p,
                   {{"gap_bound", format_double(gap_bound)},
                    {"u_c", format_double(uc)}});
  os << "n,u_c_n\n";
  for (const auto& [n, ucn] : samples)
    os << format_double(n) << "," << format_double(ucn) << "\n";
  done(path);

  if (samples.size() >= 3) {
    const ScalingFit fit = scaling_fit(samples, uc);
    std::string jpath;
    std::ofstream js = open_out(g, "scan-qpt-fit.json", jpath);
    js << "{\n  \"dwell_version\": \"" << kVersion << "\",\n"
       << "  \"model\": \"" << model_name(model) << "\",\n"
       << "  \"u_c_ref\": " << format_double(fit.u_c_ref) << ",\n"
       << "  \"alpha\": " << format_double(fit.alpha) << ",\n"
       << "  \"alpha_err\": " << format_double(fit.alpha_err) << "\n}\n";
    done(jpath);
  }
  return 0;
}

// ----------------------------------------------------------- scan-esqpt

int run_scan_esqpt(const Globals& g, const CommonOpts& o, int window,
                   int stride, double rel_tol) {
  const Model model = parse_model(o.model_name);
  const ModelParams p = params_of(o);
  const std::vector<double> grid = parse_grid(o);
  {
    const FullBasis full = build_basis(o.n, model);
    auto [even, odd] = split_parity(full);
    check_cap(g, even.dimension());
  }
  const EsqptBoundary b =
      esqpt_boundary(p, model, o.n, grid, window, stride, rel_tol);
  std::string path;
  std::ofstream os = open_out(g, "scan-esqpt.csv", path);
  std::string omitted;
  for (double u : b.omitted)
    omitted += (omitted.empty() ? "" : ";") + format_double(u);
  write_provenance(os, "scan-esqpt " + describe(o), model, p,
                   {{"omitted", omitted.empty() ? "none" : omitted}});
  os << "u,e_c_pp\n";
  for (const auto& [u, ec] : b.segments)
    os << format_double(u) << "," << format_double(ec) << "\n";
  done(path);

  if (b.has_fit) {
    std::string jpath;
    std::ofstream js = open_out(g, "scan-esqpt-fit.json", jpath);
    js << "{\n  \"dwell_version\": \"" << kVersion << "\",\n"
       << "  \"model\": \"" << model_name(model) << "\",\n"
       << "  \"slope\": " << format_double(b.slope) << ",\n"
       << "  \"intercept\": " << format_double(b.intercept) << "\n}\n";
    done(jpath);
  }
  return 0;
}

// -------------------------------------------------------- phase-diagram

int run_phase_diagram(const Globals& g, const CommonOpts& o, int window,
                      int stride, double rel_tol, double gap_bound) {
  const Model model = parse_model(o.model_name);
  const ModelParams p = params_of(o);
  {
    const FullBasis full = build_basis(o.n, model);
    auto [even, odd] = split_parity(full);
    check_cap(g, even.dimension());
  }
  const PhaseDiagram d = phase_diagram(p, model, o.n, parse_grid(o), window,
                                       stride, rel_tol, gap_bound);
  std::string path;
  std::ofstream os = open_out(g, "phase-diagram.csv", path);
  write_provenance(
      os, "phase-diagram " + describe(o), model, p,
      {{"u_c", format_double(d.u_c)},
       {"u_tilde_c", d.has_u_tilde ? format_double(d.u_tilde_c) : "none"}});
  os << "u,energy_pp,degenerate\n";
  for (const auto& cell : d.cells)
    os << format_double(cell.u) << "," << format_double(cell.energy_pp) << ","
       << (cell.degenerate ? 1 : 0) << "\n";
  done(path);
  return 0;
}

// --------------------------------------------------------------- figure

int run_figure(const Globals& g, const std::string& id,
               std::vector<int> sizes) {
  const ModelParams atoms{1.0, 0.0};
  const ModelParams mix{1.0, 9.0, 5.0, 5.0};

  if (id == "fig1d") {
    const int n = sizes.empty() ? 320 : sizes[0];
    const FullBasis full = build_basis(n, Model::AtomsOnly);
    auto [even, odd] = split_parity(full);
    std::string path;
    std::ofstream os = open_out(g, "fig1d.csv", path);
    write_provenance(os, "figure fig1d n=" + std::to_string(n),
                     Model::AtomsOnly, atoms);
    os << "u,sqrt_f_over_n,mf_imbalance\n";
    for (int i = 0; i <= 60; ++i) {
      const double u = -3.0 + i * 0.05;
      const Spectrum s = lowest_k(build_h1(even, {1.0, u}), 1, true);
      const double f =
          fisher(sector_to_full(s.vectors.col(0), even, full), full);
      const VariationalPoint mf = solve_no_molecule({1.0, u});
      os << format_double(u) << "," << format_double(std::sqrt(f) / n) << ","
         << format_double(std::abs(mf.gamma_r * mf.gamma_r -
                                   mf.gamma_l * mf.gamma_l))
         << "\n";
    }
    done(path);
    return 0;
  }
  if (id == "fig2b") {
    if (sizes.empty()) sizes = {250, 1000, 4000};
    std::string path;
    std::ofstream os = open_out(g, "fig2b.csv", path);
    write_provenance(os, "figure fig2b", Model::AtomsOnly, atoms);
    os << "n,u,gap\n";
    for (int n : sizes)
      for (int i = 0; i <= 40; ++i) {
        const double u = -1.5 + i * 0.025;
        ModelParams p = atoms;
        p.u = u;
        os << n << "," << format_double(u) << ","
           << format_double(gs_gap(p, Model::AtomsOnly, n)) << "\n";
      }
    done(path);
    return 0;
  }
  if (id == "fig5b") {
    const int n = sizes.empty() ? 200 : sizes[0];
    const FullBasis full = build_basis(n, Model::AtomsMolecule);
    auto [even, odd] = split_parity(full);
    std::string path;
    std::ofstream os = open_out(g, "fig5b.csv", path);
    write_provenance(os, "figure fig5b n=" + std::to_string(n),
                     Model::AtomsMolecule, ModelParams{1.0, 0.0, 5.0, 5.0});
    os << "u,e_exact,e_mf,e_bmf\n";
    for (int i = 0; i <= 16; ++i) {
      const double u = -3.0 + i * 0.25;
      const ModelParams p{1.0, u, 5.0, 5.0};
      const double e_exact = lowest_k(build_h2(even, p), 1).energies[0];
      const double e_mf = n * ground_state(p, Model::AtomsMolecule).energy_pp;
      double e_bmf = std::nan("");
      try {
        e_bmf = bmf_energy(p, Model::AtomsMolecule, n);
      } catch (const InstabilityError&) {
      }
      os << format_double(u) << "," << format_double(e_exact) << ","
         << format_double(e_mf) << "," << format_double(e_bmf) << "\n";
    }
    done(path);
    return 0;
  }
  if (id == "fig7a" || id == "fig8a") {
    const int n = sizes.empty() ? 320 : sizes[0];
    const Spectrum spec = merged_spectrum(g, mix, Model::AtomsMolecule, n);
    std::string path;
    std::ofstream os = open_out(g, id + ".csv", path);
    write_provenance(os, "figure " + id + " n=" + std::to_string(n),
                     Model::AtomsMolecule, mix);
    if (id == "fig7a") {
      os << "center_pp,count\n";
      for (const auto& b : dos_histogram(spec).bins)
        os << format_double(b.center) << "," << format_double(b.count) << "\n";
    } else {
      os << "energy_pp,fraction\n";
      for (const auto& pt : degeneracy_profile(spec).points)
        os << format_double(pt.energy_pp) << "," << format_double(pt.fraction)
           << "\n";
    }
    done(path);
    return 0;
  }
  if (id == "fig7b") {
    const int n = sizes.empty() ? 2000 : sizes[0];
    ModelParams p = atoms;
    p.u = 9.0;
    const Spectrum spec = merged_spectrum(g, p, Model::AtomsOnly, n);
    std::string path;
    std::ofstream os = open_out(g, "fig7b.csv", path);
    write_provenance(os, "figure fig7b n=" + std::to_string(n),
                     Model::AtomsOnly, p);
    os << "center_pp,count\n";
    for (const auto& b : dos_histogram(spec).bins)
      os << format_double(b.center) << "," << format_double(b.count) << "\n";
    done(path);
    return 0;
  }
  if (id == "fig9") {
    const int n = sizes.empty() ? 360 : sizes[0];
    const FullBasis full = build_basis(n, Model::AtomsMolecule);
    auto [even, odd] = split_parity(full);
    check_cap(g, even.dimension());
    Spectrum spec = full_spectrum(build_h2(even, mix));
    spec.n_particles = n;
    std::string path;
    std::ofstream os = open_out(g, "fig9.csv", path);
    write_provenance(os, "figure fig9 n=" + std::to_string(n),
                     Model::AtomsMolecule, mix, {{"parity", "even"}});
    os << "energy_pp,eta\n";
    for (const auto& pt : eta_profile(spec).points)
      os << format_double(pt.energy_pp) << "," << format_double(pt.eta)
         << "\n";
    done(path);
    return 0;
  }
  std::cerr << "unknown figure id '" << id
            << "' (fig1d, fig2b, fig5b, fig7a, fig7b, fig8a, fig9)\n";
  return 2;
}

void add_common(CLI::App* cmd, CommonOpts& o, bool needs_n,
                CLI::Option** omega_opt, CLI::Option** g_opt) {
  cmd->add_option("--model", o.model_name, "atoms or mixture")
      ->check(CLI::IsMember({"atoms", "mixture"}));
  auto* n_opt = cmd->add_option("--n", o.n, "particle number N");
  if (needs_n) n_opt->required();
  cmd->add_option("-J,--j", o.j, "hopping J (energy unit)");
  cmd->add_option("-U,--u", o.u, "interaction U");
  *omega_opt = cmd->add_option("--omega", o.omega, "molecular detuning");
  *g_opt = cmd->add_option("--g", o.g, "atom-molecule coupling");
  cmd->add_option("--parity", o.parity, "full, even or odd")
      ->check(CLI::IsMember({"full", "even", "odd"}));
}

void validate_model_flags(const CommonOpts& o, const CLI::Option* omega_opt,
                          const CLI::Option* g_opt) {
  if (o.model_name == "atoms" &&
      (omega_opt->count() > 0 || g_opt->count() > 0)) {
    std::cerr << "--omega/--g are only meaningful with --model mixture\n";
    std::exit(2);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"double-well Bose gas spectra and criticality diagnostics"};
  app.require_subcommand(1);

  Globals glob;
  app.add_option("--threads", glob.threads, "BLAS worker threads");
  app.add_option("--out-dir", glob.out_dir, "output directory");
  app.add_option("--seed", glob.seed, "seed for sampled statistics tests");
  app.add_flag("--allow-large", glob.allow_large,
               "permit full diagonalization beyond the dimension cap");

  struct Sub {
    CommonOpts opts;
    CLI::Option* omega_opt = nullptr;
    CLI::Option* g_opt = nullptr;
    CLI::App* cmd = nullptr;
  };
  auto make = [&](const char* name, const char* help, bool needs_n) {
    auto sub = std::make_shared<Sub>();
    sub->cmd = app.add_subcommand(name, help);
    add_common(sub->cmd, sub->opts, needs_n, &sub->omega_opt, &sub->g_opt);
    return sub;
  };

  auto basis = make("basis", "enumerate a Fock basis", true);
  auto hamiltonian = make("hamiltonian", "emit the sparse Hamiltonian", true);

  auto spectrum = make("spectrum", "eigenvalues of the Hamiltonian", true);
  int levels = 0;
  spectrum->cmd->add_option("--levels", levels,
                            "emit only the k lowest levels (0 = all)");

  auto meanfield = make("meanfield", "variational ground state", false);
  meanfield->cmd->add_option("--u-grid", meanfield->opts.u_grid,
                             "U grid lo:hi:step");

  auto fluct = make("fluct", "quadratic fluctuation spectrum", false);
  fluct->cmd->add_option("--u-grid", fluct->opts.u_grid, "U grid lo:hi:step");

  auto observables = make("observables", "spectral diagnostics", false);
  std::string what = "gap";
  int window = 100, stride = 10;
  double rel_tol = 1e-6, bin_width = 0.0;
  observables->cmd->add_option(
      "--what", what, "fisher, gap, degeneracy, dos, eta or calibrate-eta");
  observables->cmd->add_option("--window", window, "profile window size");
  observables->cmd->add_option("--stride", stride, "profile stride");
  observables->cmd->add_option("--rel-tol", rel_tol,
                               "degeneracy tolerance (relative)");
  observables->cmd->add_option("--bin-width", bin_width,
                               "DOS bin width (0 = span/100)");
  observables->cmd->add_option("--u-grid", observables->opts.u_grid,
                               "U grid lo:hi:step (gap scans)");

  auto scan_qpt = make("scan-qpt", "finite-size precursors and scaling fit",
                       false);
  std::vector<int> sizes;
  double gap_bound = 0.1;
  scan_qpt->cmd->add_option("--sizes", sizes, "particle numbers")
      ->required()
      ->delimiter(',');
  scan_qpt->cmd->add_option("--gap-bound", gap_bound, "gap threshold E1-E0 (units of J)");

  auto scan_esqpt = make("scan-esqpt", "excited-state boundary extraction",
                         true);
  int es_window = 100, es_stride = 10;
  double es_rel_tol = 1e-6;
  scan_esqpt->cmd
      ->add_option("--u-grid", scan_esqpt->opts.u_grid, "U grid lo:hi:step")
      ->required();
  scan_esqpt->cmd->add_option("--window", es_window, "profile window size");
  scan_esqpt->cmd->add_option("--stride", es_stride, "profile stride");
  scan_esqpt->cmd->add_option("--rel-tol", es_rel_tol, "degeneracy tolerance");

  auto phase = make("phase-diagram", "degeneracy map with U_c markers", true);
  int ph_window = 100, ph_stride = 10;
  double ph_rel_tol = 1e-6, ph_gap_bound = 0.1;
  phase->cmd->add_option("--u-grid", phase->opts.u_grid, "U grid lo:hi:step")
      ->required();
  phase->cmd->add_option("--window", ph_window, "profile window size");
  phase->cmd->add_option("--stride", ph_stride, "profile stride");
  phase->cmd->add_option("--rel-tol", ph_rel_tol, "degeneracy tolerance");
  phase->cmd->add_option("--gap-bound", ph_gap_bound, "gap threshold E1-E0 (units of J)");

  auto* figure = app.add_subcommand("figure", "reproduce a figure dataset");
  std::string fig_id;
  std::vector<int> fig_sizes;
  figure->add_option("--id", fig_id, "figure identifier")->required();
  figure->add_option("--sizes", fig_sizes, "particle-number overrides")
      ->delimiter(',');

  CLI11_PARSE(app, argc, argv);
  openblas_set_num_threads(glob.threads > 0 ? glob.threads : 1);

  try {
    for (const auto& sub :
         {basis, hamiltonian, spectrum, meanfield, fluct, observables,
          scan_qpt, scan_esqpt, phase}) {
      if (!sub->cmd->parsed()) continue;
      validate_model_flags(sub->opts, sub->omega_opt, sub->g_opt);
    }
    if (basis->cmd->parsed()) return run_basis(glob, basis->opts);
    if (hamiltonian->cmd->parsed())
      return run_hamiltonian(glob, hamiltonian->opts);
    if (spectrum->cmd->parsed())
      return run_spectrum(glob, spectrum->opts, levels);
    if (meanfield->cmd->parsed()) return run_meanfield(glob, meanfield->opts);
    if (fluct->cmd->parsed()) return run_fluct(glob, fluct->opts);
    if (observables->cmd->parsed())
      return run_observables(glob, observables->opts, what, window, stride,
                             rel_tol, bin_width);
    if (scan_qpt->cmd->parsed())
      return run_scan_qpt(glob, scan_qpt->opts, sizes, gap_bound);
    if (scan_esqpt->cmd->parsed())
      return run_scan_esqpt(glob, scan_esqpt->opts, es_window, es_stride,
                            es_rel_tol);
    if (phase->cmd->parsed())
      return run_phase_diagram(glob, phase->opts, ph_window, ph_stride,
                               ph_rel_tol, ph_gap_bound);
    if (figure->parsed()) return run_figure(glob, fig_id, fig_sizes);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
