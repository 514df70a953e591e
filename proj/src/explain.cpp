#include "treexplain/explain.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "treexplain/errors.hpp"
#include "treexplain/oracle.hpp"

namespace treexplain {

namespace {

index_set difference(const index_set& a, const index_set& b) {
  index_set out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

index_set with(index_set s, std::size_t i) {
  s.insert(std::lower_bound(s.begin(), s.end(), i), i);
  return s;
}

index_set without(index_set s, std::size_t i) {
  s.erase(std::lower_bound(s.begin(), s.end(), i));
  return s;
}

// Maps lattice elements (feature indices in V_f) to seed-formula variables
// (positions in V_f) and back.
class LatticeEncoding {
public:
  explicit LatticeEncoding(const index_set& referenced) : referenced_(referenced) {
    all_.resize(referenced.size());
    std::iota(all_.begin(), all_.end(), 0);
  }

  index_set features(const std::vector<bool>& model) const {
    index_set s;
    for (std::size_t k = 0; k < model.size(); ++k)
      if (model[k]) s.push_back(referenced_[k]);
    return s;
  }

  std::vector<std::size_t> vars(const index_set& s) const {
    std::vector<std::size_t> v;
    for (std::size_t f : s)
      v.push_back(static_cast<std::size_t>(
          std::lower_bound(referenced_.begin(), referenced_.end(), f) - referenced_.begin()));
    return v;
  }

  const std::vector<std::size_t>& all_vars() const { return all_; }

private:
  const index_set& referenced_;
  std::vector<std::size_t> all_;
};

}  // namespace

index_set Explanation::indices() const {
  index_set out;
  for (const FeatureValue& p : pairs) out.push_back(p.index);
  return out;
}

CostWeights::CostWeights(std::vector<double> weights) : weights_(std::move(weights)) {
  for (double w : weights_)
    if (!(w >= 0.0) || !std::isfinite(w))
      throw contract_error("cost weights must be finite and non-negative");
}

double cost(const index_set& indices, const CostWeights& w) {
  double total = 0.0;
  for (std::size_t i : indices) total += w[i];
  return total;
}

Budget Budget::seconds(double s) {
  const auto now = clock::now();
  const auto span = std::chrono::duration<double>(s);
  if (span >= clock::time_point::max() - now) return unlimited();
  return Budget(now + std::chrono::duration_cast<clock::duration>(span));
}

Query make_query(const Classifier& c, std::vector<double> instance) {
  if (instance.size() != c.input_dim()) throw contract_error("instance dimension mismatch");
  Query q;
  q.classifier = &c;
  q.label = predict_class(c, instance);
  q.instance = std::move(instance);
  return q;
}

ExplanationOracle::ExplanationOracle(const Query& q, Budget budget, bool memoize)
    : query_(&q), budget_(budget), memoize_(memoize) {
  if (!q.classifier) throw contract_error("query without classifier");
  if (q.instance.size() != q.classifier->input_dim())
    throw contract_error("instance dimension mismatch");
  if (predict_class(*q.classifier, q.instance) != q.label)
    throw contract_error("query label is not the classifier's prediction");
  referenced_ = referenced_vars(*q.classifier);
}

bool ExplanationOracle::valid_without(const index_set& absent) {
  if (memoize_) {
    auto it = memo_.find(absent);
    if (it != memo_.end()) return it->second;
  }
  if (budget_.expired()) throw budget_exhausted();

  Box box = Box::top(query_->instance.size());
  for (std::size_t i : difference(referenced_, absent))
    box[i] = Interval::point(query_->instance[i]);
  ++calls_;
  bool valid = false;
  try {
    valid = is_valid(*query_->classifier, box, query_->label, nullptr,
                     [this] { return budget_.expired(); });
  } catch (const refinement_stopped&) {
    throw budget_exhausted();
  }
  if (memoize_) memo_.emplace(absent, valid);
  return valid;
}

Explanation ExplanationOracle::explanation_for(const index_set& present,
                                               const CostWeights& w) const {
  Explanation e;
  for (std::size_t i : present) e.pairs.push_back({i, query_->instance[i]});
  e.cost = cost(present, w);
  return e;
}

index_set shrink(index_set s, const subset_oracle& oracle) {
  if (oracle(s)) throw contract_error("shrink requires an unsatisfiable set");
  const index_set candidates = s;
  for (std::size_t i : candidates) {
    index_set smaller = without(s, i);
    if (!oracle(smaller)) s = std::move(smaller);
  }
  return s;
}

index_set grow(index_set s, const index_set& universe, const subset_oracle& oracle) {
  if (!oracle(s)) throw contract_error("grow requires a satisfiable set");
  for (std::size_t i : difference(universe, s)) {
    index_set larger = with(s, i);
    if (oracle(larger)) s = std::move(larger);
  }
  return s;
}

ExplainResult minimal_explanation(const Query& q, std::span<const std::size_t> order,
                                  const CostWeights* w, Budget budget) {
  const std::size_t n = q.instance.size();
  std::vector<std::size_t> sequence(order.begin(), order.end());
  if (sequence.empty()) {
    sequence.resize(n);
    std::iota(sequence.begin(), sequence.end(), 0);
  } else {
    std::vector<std::size_t> sorted = sequence;
    std::sort(sorted.begin(), sorted.end());
    bool permutation = sorted.size() == n;
    for (std::size_t i = 0; permutation && i < n; ++i) permutation = sorted[i] == i;
    if (!permutation) throw contract_error("deletion order is not a permutation of the features");
  }

  ExplanationOracle oracle(q, budget, /*memoize=*/false);
  const index_set& vf = oracle.referenced();
  const CostWeights unit = CostWeights::unit(n);
  const CostWeights& weights = w ? *w : unit;

  ExplainResult result;
  index_set removed;
  try {
    for (std::size_t i : sequence) {
      if (!std::binary_search(vf.begin(), vf.end(), i)) continue;
      index_set relaxed = with(removed, i);
      if (oracle.valid_without(relaxed)) removed = std::move(relaxed);
    }
  } catch (const budget_exhausted&) {
    result.timed_out = true;
  }
  result.explanations.push_back(oracle.explanation_for(difference(vf, removed), weights));
  result.oracle_calls = oracle.calls();
  return result;
}

ExplainResult enumerate_minimal(const Query& q, const CostWeights& w, Budget budget,
                                const MarcoOptions& options) {
  ExplanationOracle oracle(q, budget);
  const index_set& vf = oracle.referenced();
  const LatticeEncoding enc(vf);
  const subset_oracle sat = [&](const index_set& s) { return oracle.valid_without(s); };

  SeedFormula seeds(vf.size(), options.default_polarity);
  ExplainResult result;
  try {
    while (auto model = seeds.solve()) {
      index_set seed = enc.features(*model);
      if (sat(seed)) {
        const index_set mss = grow(std::move(seed), vf, sat);
        result.explanations.push_back(oracle.explanation_for(difference(vf, mss), w));
        seeds.block_subsets(enc.vars(mss), enc.all_vars());
      } else {
        const index_set mus = shrink(std::move(seed), sat);
        if (mus.empty()) throw contract_error("instance is not classified as its label");
        ++result.mus_count;
        seeds.block_supersets(enc.vars(mus));
      }
    }
  } catch (const budget_exhausted&) {
    result.timed_out = true;
  }
  result.oracle_calls = oracle.calls();
  if (options.keep_formula) result.formula = std::move(seeds);
  return result;
}

ExplainResult minimum_explanation_marco(const Query& q, const CostWeights& w, Budget budget,
                                        const MarcoOptions& options) {
  ExplanationOracle oracle(q, budget);
  const index_set& vf = oracle.referenced();
  const LatticeEncoding enc(vf);
  const subset_oracle sat = [&](const index_set& s) { return oracle.valid_without(s); };

  SeedFormula seeds(vf.size(), options.default_polarity);
  ExplainResult result;
  index_set incumbent;  // freed features of the cheapest explanation so far
  bool grown = false;
  try {
    while (auto model = seeds.solve()) {
      index_set seed = enc.features(*model);
      if (cost(difference(vf, incumbent), w) <= cost(difference(vf, seed), w)) {
        seeds.block_subsets(enc.vars(seed), enc.all_vars());
      } else if (sat(seed)) {
        incumbent = grow(std::move(seed), vf, sat);
        grown = true;
        seeds.block_subsets(enc.vars(incumbent), enc.all_vars());
      } else {
        const index_set mus = shrink(std::move(seed), sat);
        if (mus.empty()) throw contract_error("instance is not classified as its label");
        ++result.mus_count;
        seeds.block_supersets(enc.vars(mus));
      }
    }
    // With zero weights the initial incumbent can survive unchallenged while
    // not being maximal; growing it keeps the cost and makes it minimal.
    if (!grown) incumbent = grow(std::move(incumbent), vf, sat);
  } catch (const budget_exhausted&) {
    result.timed_out = true;
  }
  result.explanations.push_back(oracle.explanation_for(difference(vf, incumbent), w));
  result.oracle_calls = oracle.calls();
  if (options.keep_formula) result.formula = std::move(seeds);
  return result;
}

ExplainResult minimum_explanation_bb(const Query& q, const CostWeights& w, Budget budget) {
  ExplanationOracle oracle(q, budget, /*memoize=*/false);
  const index_set& vf = oracle.referenced();

  ExplainResult result;
  index_set best = vf;
  double best_cost = cost(best, w);

  // Adds feature i to the present set and either records a cheaper valid
  // explanation or branches on the remaining referenced features.
  std::function<void(index_set, std::size_t)> add_variable = [&](index_set present,
                                                                 std::size_t i) {
    present = with(std::move(present), i);
    const double c = cost(present, w);
    if (best_cost <= c) return;
    if (oracle.valid_without(difference(vf, present))) {
      best = std::move(present);
      best_cost = c;
      return;
    }
    for (std::size_t j : difference(vf, present)) add_variable(present, j);
  };

  try {
    // The empty explanation is only reachable through this direct check.
    if (!vf.empty() && oracle.valid_without(vf)) {
      best.clear();
      best_cost = 0.0;
    }
    for (std::size_t i : vf) {
      if (best.empty()) break;
      add_variable({}, i);
    }
    // Zero-weight features can leave a minimum-cost set that is not minimal.
    if (std::any_of(best.begin(), best.end(), [&](std::size_t i) { return w[i] == 0.0; })) {
      const index_set candidates = best;
      for (std::size_t i : candidates) {
        index_set smaller = without(best, i);
        if (oracle.valid_without(difference(vf, smaller))) best = std::move(smaller);
      }
    }
  } catch (const budget_exhausted&) {
    result.timed_out = true;
  }
  result.explanations.push_back(oracle.explanation_for(best, w));
  result.oracle_calls = oracle.calls();
  return result;
}

}  // namespace treexplain
