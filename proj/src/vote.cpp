#include "treexplain/vote.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "treexplain/errors.hpp"

namespace treexplain {

namespace {

constexpr std::size_t none = std::numeric_limits<std::size_t>::max();

// acc += tree_transform(t, x), without allocating. lo/hi are scratch buffers
// of size output_dim.
void add_tree_hull(const Tree& t, const Box& x, std::span<Interval> acc,
                   std::vector<double>& lo, std::vector<double>& hi) {
  bool any = false;
  for (const Leaf& leaf : t.leaves()) {
    if (!leaf.overlaps(x)) continue;
    auto v = leaf.value();
    if (!any) {
      std::copy(v.begin(), v.end(), lo.begin());
      std::copy(v.begin(), v.end(), hi.begin());
      any = true;
      continue;
    }
    for (std::size_t k = 0; k < v.size(); ++k) {
      lo[k] = std::min(lo[k], v[k]);
      hi[k] = std::max(hi[k], v[k]);
    }
  }
  if (!any) throw contract_error("no leaf overlaps the box; partition violated or box empty");
  for (std::size_t k = 0; k < acc.size(); ++k) acc[k] = add(acc[k], Interval(lo[k], hi[k]));
}

}  // namespace

const char* to_string(verdict v) {
  switch (v) {
    case verdict::pass: return "pass";
    case verdict::fail: return "fail";
    case verdict::unsure: return "unsure";
  }
  return "?";
}

std::vector<Interval> tree_transform(const Tree& t, const Box& x) {
  if (x.size() != t.input_dim()) throw contract_error("box dimension mismatch");
  std::vector<Interval> out(t.output_dim(), Interval::bottom());
  bool any = false;
  for (const Leaf& leaf : t.leaves()) {
    if (!leaf.overlaps(x)) continue;
    any = true;
    auto v = leaf.value();
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = join(out[k], Interval::point(v[k]));
  }
  if (!any) throw contract_error("no leaf overlaps the box; partition violated or box empty");
  return out;
}

std::vector<Interval> ensemble_transform(const Ensemble& f, const Box& x) {
  std::vector<Interval> sum(f.output_dim(), Interval::point(0.0));
  for (const Tree& t : f.trees()) {
    const auto y = tree_transform(t, x);
    for (std::size_t k = 0; k < sum.size(); ++k) sum[k] = add(sum[k], y[k]);
  }
  return sum;
}

verdict vote_refine(const Ensemble& f, const Box& x, const property_checker& pc,
                    const vote_options& options, vote_stats* stats) {
  if (x.size() != f.input_dim()) throw contract_error("box dimension mismatch");
  if (x.is_empty()) throw contract_error("refinement of an empty box");

  const auto trees = f.trees();
  const std::size_t depth_limit = trees.size();
  std::vector<std::size_t> order = options.tree_order;
  if (order.empty()) {
    order.resize(depth_limit);
    std::iota(order.begin(), order.end(), 0);
  } else {
    std::vector<std::size_t> sorted = order;
    std::sort(sorted.begin(), sorted.end());
    bool permutation = sorted.size() == depth_limit;
    for (std::size_t i = 0; permutation && i < sorted.size(); ++i) permutation = sorted[i] == i;
    if (!permutation) throw contract_error("tree_order is not a permutation of the trees");
  }

  struct Frame {
    Box box;
    std::size_t depth;  // number of trees refined so far
    std::size_t leaf;   // leaf of trees[order[depth - 1]] this box lies in
  };
  std::vector<Frame> stack;
  stack.push_back({x, 0, none});

  // fixed[t] is the leaf of tree t that contains the current box, for every
  // tree refined along the current path. Since the box lies inside that leaf
  // the tree transform equals the leaf value, so it is not recomputed.
  std::vector<std::size_t> fixed(depth_limit, none);
  std::vector<Interval> output(f.output_dim());
  std::vector<double> lo(f.output_dim()), hi(f.output_dim());

  std::size_t steps = 0;
  while (!stack.empty()) {
    if (options.stop && ++steps % 64 == 0 && options.stop()) throw refinement_stopped();
    Frame frame = std::move(stack.back());
    stack.pop_back();

    if (frame.depth > 0) fixed[order[frame.depth - 1]] = frame.leaf;
    for (std::size_t j = frame.depth; j < depth_limit; ++j) fixed[order[j]] = none;

    std::fill(output.begin(), output.end(), Interval::point(0.0));
    for (std::size_t t = 0; t < depth_limit; ++t) {
      if (fixed[t] != none) {
        auto v = trees[t].leaves()[fixed[t]].value();
        for (std::size_t k = 0; k < output.size(); ++k)
          output[k] = add(output[k], Interval::point(v[k]));
      } else {
        add_tree_hull(trees[t], frame.box, output, lo, hi);
      }
    }

    const verdict o = pc(frame.box, output);
    if (stats) {
      ++stats->checker_calls;
      stats->max_depth = std::max(stats->max_depth, frame.depth);
      if (frame.depth == depth_limit) ++stats->leaf_calls;
    }
    if (o == verdict::pass) continue;
    if (o == verdict::fail) return o;
    if (frame.depth == depth_limit) return o;

    const Tree& tree = trees[order[frame.depth]];
    const auto leaves = tree.leaves();
    // Pushed in reverse so leaves are visited in file order.
    for (std::size_t i = leaves.size(); i-- > 0;) {
      Box refined = frame.box;
      if (leaves[i].restrict(refined)) stack.push_back({std::move(refined), frame.depth + 1, i});
    }
  }
  return verdict::pass;
}

}  // namespace treexplain
