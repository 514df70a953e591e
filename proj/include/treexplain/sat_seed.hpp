/*******************************************************************************
 *
 * Seed formula for lattice exploration: a CNF over one Boolean per lattice
 * element, grown monotonically with blocking clauses and solved by a small
 * DPLL solver (unit propagation over two watched literals, chronological
 * backtracking). The watch lists persist between calls. Decisions are
 * made in variable order with a configurable default polarity; with the
 * default (true) the first model found is the lexicographically largest one,
 * hence set-maximal.
 *
 ******************************************************************************/

#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <vector>

namespace treexplain {

/// Variable v as positive (v + 1) or negative (-(v + 1)) literal.
using literal = int;

inline literal pos(std::size_t v) { return static_cast<literal>(v) + 1; }
inline literal neg(std::size_t v) { return -(static_cast<literal>(v) + 1); }

class SeedFormula {
public:
  explicit SeedFormula(std::size_t var_count, bool default_polarity = true)
      : var_count_(var_count), default_polarity_(default_polarity) {}

  std::size_t var_count() const { return var_count_; }
  const std::vector<std::vector<literal>>& clauses() const { return clauses_; }
  bool default_polarity() const { return default_polarity_; }

  /// Appends a clause. An empty clause makes the formula permanently UNSAT.
  void add_clause(std::vector<literal> clause);

  /// Clause OR_{v in universe \ s} phi_v. `s` and `universe` are variable
  /// indices; every future model must set some variable outside s.
  void block_subsets(const std::vector<std::size_t>& s,
                     const std::vector<std::size_t>& universe);

  /// Clause OR_{v in s} not phi_v. Requires s non-empty.
  void block_supersets(const std::vector<std::size_t>& s);

  /// A total assignment satisfying every clause, or nullopt when UNSAT.
  /// Reorders the solver's private copy of the clauses.
  std::optional<std::vector<bool>> solve();

  bool satisfied_by(const std::vector<bool>& model) const;

  /// DIMACS CNF text.
  void write_dimacs(std::ostream& os) const;

private:
  std::size_t var_count_;
  bool default_polarity_;
  bool has_empty_clause_ = false;
  std::vector<std::vector<literal>> clauses_;
  // Solver view: unit clauses, and clauses of two or more distinct literals
  // whose first two entries are watched.
  std::vector<literal> units_;
  std::vector<std::vector<literal>> watched_;
  std::vector<std::vector<std::size_t>> watches_;  // indexed by literal slot
};

}  // namespace treexplain
