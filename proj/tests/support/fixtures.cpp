#include "fixtures.hpp"

namespace testing_support {

using treexplain::Classifier;
using treexplain::Ensemble;
using treexplain::SplitTree;
using treexplain::Tree;

std::filesystem::path data_dir() { return TREEXPLAIN_DATA_DIR; }

SplitTree example_splits() {
  SplitTree t;
  t.nodes = {
      SplitTree::split(2, 0.0, 1, 2), SplitTree::leaf({1.0}),
      SplitTree::split(0, 0.0, 3, 6), SplitTree::split(1, 0.0, 4, 5),
      SplitTree::leaf({1.0}),         SplitTree::leaf({-1.0}),
      SplitTree::leaf({-1.0}),
  };
  return t;
}

Tree example_tree() { return Tree::from_splits(example_splits(), 3); }

Classifier example_classifier() { return Classifier::binary(Ensemble({example_tree()}, 3, 1)); }

SplitTree bankloan_splits() {
  SplitTree t;
  t.nodes = {
      SplitTree::split(0, 0.5, 1, 8),   // low income
      SplitTree::split(1, 0.5, 2, 7),   // criminal record
      SplitTree::split(2, 0.5, 3, 4),   // low education
      SplitTree::leaf({0.0}),
      SplitTree::split(3, 0.5, 5, 6),   // missed payments
      SplitTree::leaf({0.0}),
      SplitTree::leaf({1.0}),
      SplitTree::leaf({1.0}),
      SplitTree::split(2, 0.5, 9, 10),  // low education
      SplitTree::leaf({0.0}),
      SplitTree::split(3, 0.5, 11, 12), // missed payments
      SplitTree::leaf({0.0}),
      SplitTree::leaf({1.0}),
  };
  return t;
}

Classifier bankloan_classifier() {
  return Classifier::binary(Ensemble({Tree::from_splits(bankloan_splits(), 4)}, 4, 1));
}

Classifier constant_classifier(std::size_t n, double value) {
  SplitTree t;
  t.nodes = {SplitTree::leaf({value})};
  return Classifier::binary(Ensemble({Tree::from_splits(t, n)}, n, 1));
}

}  // namespace testing_support
