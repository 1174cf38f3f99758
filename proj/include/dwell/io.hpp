#pragma once

// CSV/JSON emission helpers shared by the CLI: full-precision number
// formatting and parameter-provenance headers. Output is byte-stable for
// identical configurations.

#include <cstdio>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "dwell/fock.hpp"
#include "dwell/hamiltonian.hpp"

namespace dwell {

inline constexpr const char* kVersion = "0.1.0";

// 17 significant digits: enough to round-trip any double exactly.
inline std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

inline const char* model_name(Model m) {
  return m == Model::AtomsOnly ? "atoms" : "mixture";
}

inline const char* parity_name(Parity p) {
  return p == Parity::Even ? "even" : "odd";
}

// "# dwell-version ..." provenance header carried by every output file.
inline void write_provenance(std::ostream& os, const std::string& command,
                             Model model, const ModelParams& p,
                             const std::vector<std::pair<std::string, std::string>>&
                                 extra = {}) {
  os << "# dwell-version " << kVersion << "\n";
  os << "# command " << command << "\n";
  os << "# model " << model_name(model) << " J " << format_double(p.j) << " U "
     << format_double(p.u);
  if (model == Model::AtomsMolecule)
    os << " omega " << format_double(p.omega) << " g " << format_double(p.g);
  os << "\n";
  for (const auto& [key, value] : extra) os << "# " << key << " " << value << "\n";
}

}  // namespace dwell
