#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "jirp/common.hpp"

namespace jirp::sat {

/// CNF over variables 1..variable_count; a literal is +v or -v.
struct CnfFormula {
  int variable_count = 0;
  std::vector<std::vector<int>> clauses;

  void add_clause(std::vector<int> lits);
  void add_unit(int lit) { add_clause({lit}); }
  int new_var() { return ++variable_count; }
  void validate() const;
};

/// model[v] for v in 1..variable_count holds the assigned value.
struct Model {
  std::vector<std::uint8_t> values;  // index 0 unused
  bool value(int var) const { return values[static_cast<std::size_t>(var)]; }
};

using SatResult = std::optional<Model>;  // nullopt = UNSAT

class Solver {
 public:
  virtual ~Solver() = default;
  virtual SatResult solve(const CnfFormula& f) = 0;
};

/// Embedded conflict-driven clause-learning solver: two-watched literals,
/// first-UIP learning, VSIDS-style activities, phase saving, Luby restarts.
class CdclSolver : public Solver {
 public:
  SatResult solve(const CnfFormula& f) override;
};

/// Runs an external solver process on a DIMACS export and parses the
/// standard competition output ("s SATISFIABLE" / "s UNSATISFIABLE" plus
/// "v" value lines). The command is invoked as `<command> <cnf-file>`.
class ExternalSolver : public Solver {
 public:
  explicit ExternalSolver(std::string command);
  SatResult solve(const CnfFormula& f) override;

 private:
  std::string command_;
};

/// Solves with the embedded backend.
SatResult sat_solve(const CnfFormula& f);

std::string to_dimacs(const CnfFormula& f);
CnfFormula from_dimacs(const std::string& text);

}  // namespace jirp::sat
