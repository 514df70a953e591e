#include "treexplain/sat_seed.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <ostream>

#include "treexplain/errors.hpp"

namespace treexplain {

namespace {

std::size_t var_of(literal l) { return static_cast<std::size_t>(std::abs(l)) - 1; }

std::size_t slot(literal l) { return 2 * var_of(l) + (l > 0 ? 0 : 1); }

}  // namespace

void SeedFormula::add_clause(std::vector<literal> clause) {
  for (literal l : clause)
    if (l == 0 || var_of(l) >= var_count_) throw contract_error("literal out of range");
  clauses_.push_back(clause);
  if (clause.empty()) {
    has_empty_clause_ = true;
    return;
  }

  std::sort(clause.begin(), clause.end());
  clause.erase(std::unique(clause.begin(), clause.end()), clause.end());
  for (literal l : clause)
    if (std::binary_search(clause.begin(), clause.end(), -l)) return;  // tautology
  if (clause.size() == 1) {
    units_.push_back(clause[0]);
    return;
  }
  if (watches_.empty()) watches_.resize(2 * var_count_);
  watches_[slot(clause[0])].push_back(watched_.size());
  watches_[slot(clause[1])].push_back(watched_.size());
  watched_.push_back(std::move(clause));
}

void SeedFormula::block_subsets(const std::vector<std::size_t>& s,
                                const std::vector<std::size_t>& universe) {
  std::vector<bool> in_s(var_count_, false);
  for (std::size_t v : s) {
    if (v >= var_count_) throw contract_error("variable out of range");
    in_s[v] = true;
  }
  std::vector<literal> clause;
  for (std::size_t v : universe)
    if (!in_s[v]) clause.push_back(pos(v));
  add_clause(std::move(clause));
}

void SeedFormula::block_supersets(const std::vector<std::size_t>& s) {
  if (s.empty()) throw contract_error("blocking supersets of the empty set");
  std::vector<literal> clause;
  for (std::size_t v : s) clause.push_back(neg(v));
  add_clause(std::move(clause));
}

bool SeedFormula::satisfied_by(const std::vector<bool>& model) const {
  if (model.size() != var_count_) return false;
  for (const auto& clause : clauses_) {
    bool sat = false;
    for (literal l : clause)
      if (model[var_of(l)] == (l > 0)) {
        sat = true;
        break;
      }
    if (!sat) return false;
  }
  return true;
}

std::optional<std::vector<bool>> SeedFormula::solve() {
  if (has_empty_clause_) return std::nullopt;
  if (watches_.empty()) watches_.resize(2 * var_count_);

  std::vector<std::int8_t> value(var_count_, -1);
  auto lit_value = [&](literal l) -> int {
    const std::int8_t v = value[var_of(l)];
    if (v < 0) return -1;
    return (v == 1) == (l > 0) ? 1 : 0;
  };

  std::vector<literal> trail;
  std::size_t head = 0;
  auto assign = [&](literal l) {
    value[var_of(l)] = l > 0 ? 1 : 0;
    trail.push_back(l);
  };

  // Returns false on conflict.
  auto propagate = [&]() {
    while (head < trail.size()) {
      const literal falsified = -trail[head++];
      auto& ws = watches_[slot(falsified)];
      for (std::size_t i = 0; i < ws.size();) {
        auto& clause = watched_[ws[i]];
        if (clause[0] == falsified) std::swap(clause[0], clause[1]);
        if (lit_value(clause[0]) == 1) {
          ++i;
          continue;
        }
        bool moved = false;
        for (std::size_t k = 2; k < clause.size(); ++k) {
          if (lit_value(clause[k]) == 0) continue;
          std::swap(clause[1], clause[k]);
          watches_[slot(clause[1])].push_back(ws[i]);
          ws[i] = ws.back();
          ws.pop_back();
          moved = true;
          break;
        }
        if (moved) continue;
        if (lit_value(clause[0]) == 0) return false;
        assign(clause[0]);
        ++i;
      }
    }
    return true;
  };

  for (literal l : units_) {
    const int v = lit_value(l);
    if (v == 0) return std::nullopt;
    if (v < 0) assign(l);
  }

  struct Decision {
    std::size_t trail_pos;
    std::size_t var;
    bool flipped;
  };
  std::vector<Decision> decisions;
  std::size_t next_var = 0;

  auto undo_to = [&](std::size_t pos) {
    while (trail.size() > pos) {
      value[var_of(trail.back())] = -1;
      trail.pop_back();
    }
    head = pos;
  };

  while (true) {
    if (!propagate()) {
      while (!decisions.empty() && decisions.back().flipped) {
        undo_to(decisions.back().trail_pos);
        decisions.pop_back();
      }
      if (decisions.empty()) return std::nullopt;
      Decision& d = decisions.back();
      undo_to(d.trail_pos);
      d.flipped = true;
      assign(default_polarity_ ? neg(d.var) : pos(d.var));
      next_var = d.var + 1;
      continue;
    }

    while (next_var < var_count_ && value[next_var] >= 0) ++next_var;
    if (next_var == var_count_) break;
    decisions.push_back({trail.size(), next_var, false});
    assign(default_polarity_ ? pos(next_var) : neg(next_var));
  }

  std::vector<bool> model(var_count_);
  for (std::size_t v = 0; v < var_count_; ++v) model[v] = value[v] == 1;
  return model;
}

void SeedFormula::write_dimacs(std::ostream& os) const {
  os << "p cnf " << var_count_ << ' ' << clauses_.size() << '\n';
  for (const auto& clause : clauses_) {
    for (literal l : clause) os << l << ' ';
    os << "0\n";
  }
}

}  // namespace treexplain
