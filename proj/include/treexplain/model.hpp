/*******************************************************************************
 *
 * Tree-ensemble classifiers stored as flat leaf tables.
 *
 * A Tree is a list of leaves; each leaf is a hyperrectangle of the input space
 * (given sparsely, one bound per constrained dimension) together with an
 * output tuple. The leaf regions of a tree partition the input space. An
 * Ensemble sums the outputs of its trees. A Classifier is either a binary
 * classifier (one ensemble, sigmoid threshold at 0.5) or a one-vs-rest
 * multi-class classifier (one ensemble per class, argmax with ties resolved
 * to the smallest class index).
 *
 * Feature and class indices are zero-based.
 *
 ******************************************************************************/

#pragma once

#include <cstddef>
#include <span>
#include <variant>
#include <vector>

#include "treexplain/interval.hpp"

namespace treexplain {

/// Sorted set of feature indices.
using index_set = std::vector<std::size_t>;

struct DimBound {
  std::size_t dim;
  Interval range;
};

class Leaf {
public:
  Leaf(std::vector<DimBound> bounds, std::vector<double> value);

  /// Constrained dimensions sorted by index, at most one bound per dimension.
  std::span<const DimBound> bounds() const { return bounds_; }
  std::span<const double> value() const { return value_; }

  /// The dense region; unconstrained dimensions are top.
  Box region(std::size_t n) const;
  bool contains(std::span<const double> x) const;
  /// region(n) meet box is non-empty.
  bool overlaps(const Box& box) const;
  /// Narrows `box` in place to its intersection with the region. Returns false
  /// (leaving box in an unspecified state) when the intersection is empty.
  bool restrict(Box& box) const;

private:
  std::vector<DimBound> bounds_;
  std::vector<double> value_;
};

/// Node-form decision tree with rules `x[dim] <= threshold`: the left child
/// takes the rule, the right child its negation.
struct SplitTree {
  struct Node {
    bool is_leaf = false;
    std::size_t dim = 0;
    double threshold = 0.0;
    std::size_t left = 0;
    std::size_t right = 0;
    std::vector<double> value;
  };
  std::vector<Node> nodes;  ///< nodes[0] is the root.

  static Node split(std::size_t dim, double threshold, std::size_t left,
                    std::size_t right) {
    Node n;
    n.dim = dim;
    n.threshold = threshold;
    n.left = left;
    n.right = right;
    return n;
  }
  static Node leaf(std::vector<double> value) {
    Node n;
    n.is_leaf = true;
    n.value = std::move(value);
    return n;
  }
};

class Tree {
public:
  /// Throws dimension_error / partition_error when the leaves do not form a
  /// partition of the n-dimensional space with m-dimensional outputs.
  Tree(std::vector<Leaf> leaves, std::size_t input_dim, std::size_t output_dim);

  /// Converts root-to-leaf paths of a split tree into leaf boxes. A left branch
  /// bounds the dimension above by the threshold; a right branch bounds it
  /// below by the float successor of the threshold.
  static Tree from_splits(const SplitTree& splits, std::size_t input_dim);

  std::span<const Leaf> leaves() const { return leaves_; }
  std::size_t input_dim() const { return input_dim_; }
  std::size_t output_dim() const { return output_dim_; }

  /// Index of the unique leaf containing x; contract_error if none.
  std::size_t leaf_index(std::span<const double> x) const;

private:
  std::vector<Leaf> leaves_;
  std::size_t input_dim_;
  std::size_t output_dim_;
};

class Ensemble {
public:
  Ensemble(std::vector<Tree> trees, std::size_t input_dim, std::size_t output_dim);

  std::span<const Tree> trees() const { return trees_; }
  std::size_t input_dim() const { return input_dim_; }
  std::size_t output_dim() const { return output_dim_; }

private:
  std::vector<Tree> trees_;
  std::size_t input_dim_;
  std::size_t output_dim_;
};

class Classifier {
public:
  enum class kind { binary, multiclass };

  static Classifier binary(Ensemble ensemble);
  /// Requires at least three ensembles, all with scalar outputs.
  static Classifier multiclass(std::vector<Ensemble> ensembles);

  kind type() const { return kind_; }
  bool is_binary() const { return kind_ == kind::binary; }
  std::size_t input_dim() const { return ensembles_.front().input_dim(); }
  /// 2 for binary classifiers.
  std::size_t class_count() const;

  std::span<const Ensemble> ensembles() const { return ensembles_; }
  const Ensemble& ensemble(std::size_t i) const { return ensembles_.at(i); }

private:
  Classifier(kind k, std::vector<Ensemble> ensembles);

  kind kind_;
  std::vector<Ensemble> ensembles_;
};

std::vector<double> predict_tree(const Tree& t, std::span<const double> x);
std::vector<double> predict_ensemble(const Ensemble& f, std::span<const double> x);

/// One raw score per class: the single ensemble sum for binary classifiers,
/// the per-class sums for multi-class ones.
std::vector<double> class_scores(const Classifier& c, std::span<const double> x);

/// Binary: 1 iff sigmoid(sum) > 0.5. Multi-class: smallest index among the
/// maximal raw scores.
int predict_class(const Classifier& c, std::span<const double> x);

/// Smallest index of the maximum element.
int argmax_first(std::span<const double> z);

std::vector<double> softmax(std::span<const double> z);

/// Dimensions constrained by at least one leaf of any tree.
index_set referenced_vars(const Tree& t);
index_set referenced_vars(const Ensemble& f);
index_set referenced_vars(const Classifier& c);

}  // namespace treexplain
