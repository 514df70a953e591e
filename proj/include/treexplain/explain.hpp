/*******************************************************************************
 *
 * Explanation search over the power-set lattice of absent features.
 *
 * A lattice element S is a set of referenced features that are freed (set
 * to top); it is satisfiable when the prediction stays the same for every
 * assignment to them. The complement of a maximal satisfiable S is a minimal
 * explanation. Everything here talks to the model only through
 * ExplanationOracle.
 *
 ******************************************************************************/

#pragma once

#include <chrono>
#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "treexplain/model.hpp"
#include "treexplain/sat_seed.hpp"

namespace treexplain {

struct FeatureValue {
  std::size_t index;
  double value;
  bool operator==(const FeatureValue&) const = default;
};

struct Explanation {
  std::vector<FeatureValue> pairs;  ///< sorted by index
  double cost = 0.0;

  index_set indices() const;
};

/// Non-negative per-feature weights; the cost of a set is the sum of its
/// weights.
class CostWeights {
public:
  explicit CostWeights(std::vector<double> weights);
  static CostWeights unit(std::size_t n) { return CostWeights(std::vector<double>(n, 1.0)); }

  std::size_t size() const { return weights_.size(); }
  double operator[](std::size_t i) const { return weights_.at(i); }
  std::span<const double> weights() const { return weights_; }

private:
  std::vector<double> weights_;
};

double cost(const index_set& indices, const CostWeights& w);

/// Wall-clock deadline, checked before and during oracle calls.
class Budget {
public:
  using clock = std::chrono::steady_clock;

  static Budget unlimited() { return Budget(clock::time_point::max()); }
  static Budget seconds(double s);

  bool expired() const { return clock::now() >= deadline_; }

private:
  explicit Budget(clock::time_point deadline) : deadline_(deadline) {}
  clock::time_point deadline_;
};

/// Thrown by ExplanationOracle when the budget runs out.
class budget_exhausted : public std::runtime_error {
public:
  budget_exhausted() : std::runtime_error("explanation budget exhausted") {}
};

/// A prediction to explain. `label` is the classifier's own prediction.
struct Query {
  const Classifier* classifier = nullptr;
  std::vector<double> instance;
  int label = 0;
};

Query make_query(const Classifier& c, std::vector<double> instance);

/// Validity of a query with a given set of freed referenced features.
/// Unreferenced features are always free.
class ExplanationOracle {
public:
  ExplanationOracle(const Query& q, Budget budget = Budget::unlimited(), bool memoize = true);

  const Query& query() const { return *query_; }
  const index_set& referenced() const { return referenced_; }

  /// Throws budget_exhausted if the deadline passes before or during the call.
  bool valid_without(const index_set& absent);

  /// Oracle executions (memo hits excluded).
  std::size_t calls() const { return calls_; }

  Explanation explanation_for(const index_set& present, const CostWeights& w) const;

private:
  const Query* query_;
  index_set referenced_;
  Budget budget_;
  bool memoize_;
  std::map<index_set, bool> memo_;
  std::size_t calls_ = 0;
};

using subset_oracle = std::function<bool(const index_set&)>;

/// Deletion filter down to a minimal unsatisfiable subset. Requires
/// oracle(s) to be false; elements are tried in ascending order.
index_set shrink(index_set s, const subset_oracle& oracle);

/// Grows a satisfiable s to a maximal satisfiable subset of universe, trying
/// the elements of universe \ s in ascending order.
index_set grow(index_set s, const index_set& universe, const subset_oracle& oracle);

struct ExplainResult {
  std::vector<Explanation> explanations;
  bool timed_out = false;
  std::size_t oracle_calls = 0;
  /// Minimal unsatisfiable subsets met during lattice exploration.
  std::size_t mus_count = 0;
  /// Final seed formula, when requested.
  std::optional<SeedFormula> formula;
};

struct MarcoOptions {
  bool default_polarity = true;
  bool keep_formula = false;
};

/// Deletion filter over the features in `order` (a permutation of all
/// feature indices; empty means ascending). Yields one minimal explanation.
ExplainResult minimal_explanation(const Query& q, std::span<const std::size_t> order = {},
                                  const CostWeights* w = nullptr,
                                  Budget budget = Budget::unlimited());

/// All minimal explanations, one per maximal satisfiable subset.
ExplainResult enumerate_minimal(const Query& q, const CostWeights& w,
                                Budget budget = Budget::unlimited(),
                                const MarcoOptions& options = {});

/// One minimum-cost minimal explanation by cost-pruned lattice exploration.
ExplainResult minimum_explanation_marco(const Query& q, const CostWeights& w,
                                        Budget budget = Budget::unlimited(),
                                        const MarcoOptions& options = {});

/// One minimum-cost explanation by branch and bound over feature additions.
ExplainResult minimum_explanation_bb(const Query& q, const CostWeights& w,
                                     Budget budget = Budget::unlimited());

}  // namespace treexplain
