#include "treexplain/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <string>

#include "treexplain/errors.hpp"

namespace treexplain {

namespace {

std::string leaf_where(std::size_t i) { return "leaves[" + std::to_string(i) + "]"; }

// True when the union of `candidates` covers `box`. The candidates are known
// to be pairwise disjoint, so the first overlapping one can be peeled off the
// box and the remainder split into at most two slabs along one dimension.
bool covers(const Box& box, std::span<const Leaf> leaves,
            std::vector<std::size_t> candidates) {
  std::erase_if(candidates,
                [&](std::size_t i) { return !leaves[i].overlaps(box); });
  if (candidates.empty()) return false;

  const Leaf& first = leaves[candidates.front()];
  for (const DimBound& b : first.bounds()) {
    const Interval& have = box[b.dim];
    const bool cut_below = have.lower() < b.range.lower();
    const bool cut_above = have.upper() > b.range.upper();
    if (!cut_below && !cut_above) continue;

    if (cut_below) {
      Box slab = box;
      slab[b.dim] = Interval(have.lower(), float_predecessor(b.range.lower()));
      if (!covers(slab, leaves, candidates)) return false;
    }
    if (cut_above) {
      Box slab = box;
      slab[b.dim] = Interval(float_successor(b.range.upper()), have.upper());
      if (!covers(slab, leaves, candidates)) return false;
    }
    Box inner = box;
    inner[b.dim] = meet(have, b.range);
    return covers(inner, leaves, std::move(candidates));
  }
  // `first` contains the whole box.
  return true;
}

}  // namespace

Leaf::Leaf(std::vector<DimBound> bounds, std::vector<double> value)
    : value_(std::move(value)) {
  std::sort(bounds.begin(), bounds.end(),
            [](const DimBound& a, const DimBound& b) { return a.dim < b.dim; });
  for (const DimBound& b : bounds) {
    if (b.range.is_bottom()) throw contract_error("leaf bound is empty");
    if (!bounds_.empty() && bounds_.back().dim == b.dim)
      throw contract_error("leaf bounds dimension " + std::to_string(b.dim) +
                           " twice");
    if (!b.range.is_top()) bounds_.push_back(b);
  }
}

Box Leaf::region(std::size_t n) const {
  Box box = Box::top(n);
  for (const DimBound& b : bounds_) box[b.dim] = b.range;
  return box;
}

bool Leaf::contains(std::span<const double> x) const {
  for (const DimBound& b : bounds_)
    if (!b.range.contains(x[b.dim])) return false;
  return true;
}

bool Leaf::overlaps(const Box& box) const {
  for (const DimBound& b : bounds_) {
    const Interval& iv = box[b.dim];
    if (iv.is_bottom()) return false;
    if (std::max(iv.lower(), b.range.lower()) >
        std::min(iv.upper(), b.range.upper()))
      return false;
  }
  return true;
}

bool Leaf::restrict(Box& box) const {
  for (const DimBound& b : bounds_) {
    box[b.dim] = meet(box[b.dim], b.range);
    if (box[b.dim].is_bottom()) return false;
  }
  return true;
}

Tree::Tree(std::vector<Leaf> leaves, std::size_t input_dim, std::size_t output_dim)
    : leaves_(std::move(leaves)), input_dim_(input_dim), output_dim_(output_dim) {
  if (leaves_.empty()) throw partition_error("tree has no leaves", "");
  for (std::size_t i = 0; i < leaves_.size(); ++i) {
    const Leaf& leaf = leaves_[i];
    if (leaf.value().size() != output_dim_)
      throw dimension_error("leaf value has " +
                                std::to_string(leaf.value().size()) +
                                " components, tree expects " +
                                std::to_string(output_dim_),
                            leaf_where(i));
    for (const DimBound& b : leaf.bounds())
      if (b.dim >= input_dim_)
        throw dimension_error("bound on dimension " + std::to_string(b.dim) +
                                  " of a " + std::to_string(input_dim_) +
                                  "-dimensional tree",
                              leaf_where(i));
  }

  for (std::size_t i = 0; i < leaves_.size(); ++i) {
    const Box region = leaves_[i].region(input_dim_);
    for (std::size_t j = i + 1; j < leaves_.size(); ++j)
      if (leaves_[j].overlaps(region))
        throw partition_error("leaf regions overlap with " + leaf_where(j),
                              leaf_where(i));
  }

  std::vector<std::size_t> all(leaves_.size());
  std::iota(all.begin(), all.end(), 0);
  if (!covers(Box::top(input_dim_), leaves_, std::move(all)))
    throw partition_error("leaf regions do not cover the input space", "");
}

Tree Tree::from_splits(const SplitTree& splits, std::size_t input_dim) {
  if (splits.nodes.empty()) throw malformed_model_error("split tree has no nodes", "");

  std::vector<Leaf> leaves;
  std::size_t output_dim = 0;
  bool have_output_dim = false;

  struct Pending {
    std::size_t node;
    Box region;
    std::size_t depth;
  };
  std::vector<Pending> stack{{0, Box::top(input_dim), 0}};
  while (!stack.empty()) {
    Pending p = std::move(stack.back());
    stack.pop_back();
    if (p.node >= splits.nodes.size())
      throw malformed_model_error("child index " + std::to_string(p.node) +
                                      " out of range",
                                  "");
    if (p.depth > splits.nodes.size())
      throw malformed_model_error("split tree contains a cycle", "");
    const SplitTree::Node& node = splits.nodes[p.node];

    if (node.is_leaf) {
      if (!have_output_dim) {
        output_dim = node.value.size();
        have_output_dim = true;
      }
      std::vector<DimBound> bounds;
      for (std::size_t d = 0; d < input_dim; ++d)
        if (!p.region[d].is_top()) bounds.push_back({d, p.region[d]});
      leaves.emplace_back(std::move(bounds), node.value);
      continue;
    }

    if (node.dim >= input_dim)
      throw dimension_error("split on dimension " + std::to_string(node.dim) +
                                " of a " + std::to_string(input_dim) +
                                "-dimensional tree",
                            "nodes[" + std::to_string(p.node) + "]");
    if (!std::isfinite(node.threshold))
      throw malformed_model_error("non-finite split threshold",
                                  "nodes[" + std::to_string(p.node) + "]");

    Box left = p.region;
    Box right = p.region;
    left[node.dim] = meet(left[node.dim],
                          Interval(-std::numeric_limits<double>::infinity(),
                                   node.threshold));
    right[node.dim] = meet(right[node.dim],
                           Interval(float_successor(node.threshold),
                                    std::numeric_limits<double>::infinity()));
    // Unreachable branches (a rule contradicting an ancestor) hold no points.
    if (!right.is_empty()) stack.push_back({node.right, std::move(right), p.depth + 1});
    if (!left.is_empty()) stack.push_back({node.left, std::move(left), p.depth + 1});
  }
  return Tree(std::move(leaves), input_dim, output_dim);
}

std::size_t Tree::leaf_index(std::span<const double> x) const {
  for (std::size_t i = 0; i < leaves_.size(); ++i)
    if (leaves_[i].contains(x)) return i;
  throw contract_error("no leaf contains the input; partition violated");
}

Ensemble::Ensemble(std::vector<Tree> trees, std::size_t input_dim,
                   std::size_t output_dim)
    : trees_(std::move(trees)), input_dim_(input_dim), output_dim_(output_dim) {
  for (std::size_t i = 0; i < trees_.size(); ++i) {
    const Tree& t = trees_[i];
    if (t.input_dim() != input_dim_ || t.output_dim() != output_dim_)
      throw dimension_error("tree dimensions (" + std::to_string(t.input_dim()) +
                                ", " + std::to_string(t.output_dim()) +
                                ") differ from ensemble (" +
                                std::to_string(input_dim_) + ", " +
                                std::to_string(output_dim_) + ")",
                            "trees[" + std::to_string(i) + "]");
  }
}

Classifier::Classifier(kind k, std::vector<Ensemble> ensembles)
    : kind_(k), ensembles_(std::move(ensembles)) {
  if (ensembles_.empty()) throw dimension_error("classifier has no ensembles", "");
  const std::size_t n = ensembles_.front().input_dim();
  for (std::size_t i = 0; i < ensembles_.size(); ++i) {
    if (ensembles_[i].output_dim() != 1)
      throw dimension_error("classifier ensembles must have scalar outputs",
                            "ensembles[" + std::to_string(i) + "]");
    if (ensembles_[i].input_dim() != n)
      throw dimension_error("ensembles disagree on the input dimension",
                            "ensembles[" + std::to_string(i) + "]");
  }
}

Classifier Classifier::binary(Ensemble ensemble) {
  std::vector<Ensemble> e;
  e.push_back(std::move(ensemble));
  return Classifier(kind::binary, std::move(e));
}

Classifier Classifier::multiclass(std::vector<Ensemble> ensembles) {
  if (ensembles.size() < 3)
    throw dimension_error("multi-class classifier needs at least 3 classes", "");
  return Classifier(kind::multiclass, std::move(ensembles));
}

std::size_t Classifier::class_count() const {
  return is_binary() ? 2 : ensembles_.size();
}

std::vector<double> predict_tree(const Tree& t, std::span<const double> x) {
  if (x.size() != t.input_dim()) throw contract_error("input dimension mismatch");
  auto v = t.leaves()[t.leaf_index(x)].value();
  return {v.begin(), v.end()};
}

std::vector<double> predict_ensemble(const Ensemble& f, std::span<const double> x) {
  if (x.size() != f.input_dim()) throw contract_error("input dimension mismatch");
  std::vector<double> sum(f.output_dim(), 0.0);
  for (const Tree& t : f.trees()) {
    auto v = t.leaves()[t.leaf_index(x)].value();
    for (std::size_t k = 0; k < sum.size(); ++k) sum[k] += v[k];
  }
  return sum;
}

std::vector<double> class_scores(const Classifier& c, std::span<const double> x) {
  std::vector<double> scores;
  for (const Ensemble& f : c.ensembles()) scores.push_back(predict_ensemble(f, x)[0]);
  return scores;
}

int argmax_first(std::span<const double> z) {
  if (z.empty()) throw contract_error("argmax of empty tuple");
  std::size_t best = 0;
  for (std::size_t i = 1; i < z.size(); ++i)
    if (z[i] > z[best]) best = i;
  return static_cast<int>(best);
}

int predict_class(const Classifier& c, std::span<const double> x) {
  const std::vector<double> scores = class_scores(c, x);
  if (c.is_binary()) return sigmoid(scores[0]) > 0.5 ? 1 : 0;
  return argmax_first(scores);
}

std::vector<double> softmax(std::span<const double> z) {
  if (z.empty()) throw contract_error("softmax of empty tuple");
  const double top = *std::max_element(z.begin(), z.end());
  std::vector<double> out;
  out.reserve(z.size());
  double total = 0.0;
  for (double v : z) {
    out.push_back(std::exp(v - top));
    total += out.back();
  }
  for (double& v : out) v /= total;
  return out;
}

index_set referenced_vars(const Tree& t) {
  std::set<std::size_t> dims;
  for (const Leaf& leaf : t.leaves())
    for (const DimBound& b : leaf.bounds()) dims.insert(b.dim);
  return {dims.begin(), dims.end()};
}

index_set referenced_vars(const Ensemble& f) {
  std::set<std::size_t> dims;
  for (const Tree& t : f.trees())
    for (std::size_t d : referenced_vars(t)) dims.insert(d);
  return {dims.begin(), dims.end()};
}

index_set referenced_vars(const Classifier& c) {
  std::set<std::size_t> dims;
  for (const Ensemble& f : c.ensembles())
    for (std::size_t d : referenced_vars(f)) dims.insert(d);
  return {dims.begin(), dims.end()};
}

}  // namespace treexplain
