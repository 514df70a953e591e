#include <doctest.h>

#include <random>

#include "fixtures.hpp"
#include "random_models.hpp"
#include "treexplain/errors.hpp"
#include "treexplain/oracle.hpp"
#include "treexplain/vote.hpp"

using namespace treexplain;
using namespace testing_support;

namespace {

Box random_box(std::mt19937_64& rng, const NodeModel& m) {
  const std::vector<double> a = random_instance(rng, m), b = random_instance(rng, m);
  std::vector<Interval> dims;
  for (std::size_t d = 0; d < m.n; ++d) {
    switch (rng() % 3) {
      case 0: dims.push_back(Interval::top()); break;
      case 1: dims.push_back(Interval::point(a[d])); break;
      default: dims.push_back(Interval(std::min(a[d], b[d]), std::max(a[d], b[d]))); break;
    }
  }
  return Box(std::move(dims));
}

std::vector<double> sample_box(std::mt19937_64& rng, const NodeModel& m, const Box& box) {
  std::vector<double> x = random_instance(rng, m);
  for (std::size_t d = 0; d < m.n; ++d) {
    const Interval& iv = box[d];
    if (iv.contains(x[d])) continue;
    x[d] = rng() % 2 ? iv.lower() : iv.upper();
    if (!std::isfinite(x[d])) x[d] = std::isfinite(iv.lower()) ? iv.lower() : iv.upper();
    if (!std::isfinite(x[d])) x[d] = 0.0;
  }
  return x;
}

bool all_singletons(std::span<const Interval> ys) {
  for (const Interval& y : ys)
    if (!y.is_singleton()) return false;
  return true;
}

}  // namespace

TEST_CASE("tree transformer") {
  const Tree example = example_tree();
  CHECK(tree_transform(example, Box::top(3)) == std::vector<Interval>{Interval(-1, 1)});
  CHECK(tree_transform(example, Box::point(std::vector<double>{0, 0, 0})) ==
        std::vector<Interval>{Interval(1, 1)});
  CHECK(tree_transform(example, Box{Interval::top(), Interval::top(), Interval(-5, 0)}) ==
        std::vector<Interval>{Interval(1, 1)});
  CHECK_THROWS_AS(tree_transform(example, Box::top(2)), contract_error);
}

TEST_CASE("ensemble transformer") {
  const Tree example = example_tree();
  const Box x{Interval(-1, 0), Interval::top(), Interval(0, 2)};
  CHECK(ensemble_transform(Ensemble({example}, 3, 1), x) == tree_transform(example, x));
  CHECK(ensemble_transform(Ensemble({example, example}, 3, 1), Box::point(std::vector<double>{0, 0, 0})) ==
        std::vector<Interval>{Interval(2, 2)});

  std::mt19937_64 rng(31);
  RandomModelParams p;
  p.max_trees = 3;
  for (int trial = 0; trial < 30; ++trial) {
    NodeModel m = random_model(rng, p);
    while (m.ensembles[0].size() < 3) m.ensembles[0].push_back(m.ensembles[0].back());
    const Classifier c = m.classifier();
    const Box box = random_box(rng, m);
    const Interval y = ensemble_transform(c.ensemble(0), box)[0];
    for (int k = 0; k < 1000; ++k) REQUIRE(y.contains(node_scores(m, sample_box(rng, m, box))[0]));
  }
}

TEST_CASE("tree transformer is conservative") {
  std::mt19937_64 rng(32);
  for (int trial = 0; trial < 200; ++trial) {
    const NodeModel m = random_model(rng, {});
    const Classifier c = m.classifier();
    const Box box = random_box(rng, m);
    for (std::size_t t = 0; t < m.ensembles[0].size(); ++t) {
      const Interval y = tree_transform(c.ensemble(0).trees()[t], box)[0];
      for (int k = 0; k < 50; ++k)
        REQUIRE(y.contains(node_value(m.ensembles[0][t], sample_box(rng, m, box))));
    }
  }
}

TEST_CASE("singleton boxes are exact") {
  std::mt19937_64 rng(33);
  for (int trial = 0; trial < 200; ++trial) {
    RandomModelParams p;
    p.classes = trial % 2 ? 2 : 3;
    const NodeModel m = random_model(rng, p);
    const Classifier c = m.classifier();
    const std::vector<double> x = random_instance(rng, m);
    for (std::size_t e = 0; e < c.ensembles().size(); ++e) {
      const auto y = ensemble_transform(c.ensemble(e), Box::point(x));
      REQUIRE(y[0].is_singleton());
      CHECK(y[0].lower() == predict_ensemble(c.ensemble(e), x)[0]);
    }
  }
}

TEST_CASE("refinement driver") {
  const Classifier example = example_classifier();
  const Ensemble& f = example.ensemble(0);

  vote_stats stats;
  const property_checker pass = [](const Box&, std::span<const Interval>) {
    return verdict::pass;
  };
  CHECK(vote_refine(f, Box::top(3), pass, {}, &stats) == verdict::pass);
  CHECK(stats.checker_calls == 1);
  CHECK(stats.max_depth == 0);

  std::mt19937_64 rng(34);
  const NodeModel m = random_model(rng, {5, 5, 3, 2, 3});
  const Classifier c = m.classifier();
  std::vector<std::vector<Interval>> seen;
  const property_checker unsure = [&](const Box&, std::span<const Interval> y) {
    seen.emplace_back(y.begin(), y.end());
    return verdict::unsure;
  };
  stats = {};
  CHECK(vote_refine(c.ensemble(0), Box::top(m.n), unsure, {}, &stats) == verdict::unsure);
  CHECK(stats.max_depth == m.ensembles[0].size());
  CHECK(stats.leaf_calls == 1);
  CHECK(all_singletons(seen.back()));

  // Validity of {x3 = 0} via a label checker on the sigmoid abstraction.
  const property_checker label1 = [](const Box&, std::span<const Interval> y) {
    const Interval d = binary_label_set(y[0]);
    if (!d.is_singleton()) return verdict::unsure;
    return d.contains(1.0) ? verdict::pass : verdict::fail;
  };
  CHECK(vote_refine(f, Box{Interval::top(), Interval::top(), Interval(0, 0)}, label1) ==
        verdict::pass);
  CHECK(vote_refine(f, Box{Interval(0, 0), Interval::top(), Interval::top()}, label1) ==
        verdict::fail);

  Box empty = Box::top(3);
  empty[1] = Interval::bottom();
  CHECK_THROWS_AS(vote_refine(f, empty, pass), contract_error);
  CHECK_THROWS_AS(vote_refine(f, Box::top(2), pass), contract_error);
}

TEST_CASE("full refinement is precise") {
  std::mt19937_64 rng(35);
  for (int trial = 0; trial < 200; ++trial) {
    const NodeModel m = random_model(rng, {});
    const Classifier c = m.classifier();
    const std::size_t trees = m.ensembles[0].size();
    vote_stats stats;
    bool precise = true;
    std::size_t depth_b_calls = 0;
    // Pass everywhere except at full depth, where the output must be exact.
    const property_checker pc = [&](const Box& box, std::span<const Interval> y) {
      std::size_t pinned = 0;
      for (const Tree& t : c.ensemble(0).trees()) {
        std::size_t overlapping = 0;
        for (const Leaf& l : t.leaves()) overlapping += l.overlaps(box) ? 1 : 0;
        pinned += overlapping == 1 ? 1 : 0;
      }
      if (pinned == trees) {
        ++depth_b_calls;
        precise = precise && all_singletons(y);
        return verdict::pass;
      }
      return verdict::unsure;
    };
    CHECK(vote_refine(c.ensemble(0), random_box(rng, m), pc, {}, &stats) == verdict::pass);
    CHECK(precise);
    CHECK(stats.max_depth <= trees);
    std::size_t bound = 1, product = 1;
    for (const Tree& t : c.ensemble(0).trees()) {
      product *= t.leaves().size();
      bound += product;
    }
    CHECK(stats.checker_calls <= bound);
    CHECK(depth_b_calls > 0);
  }
}

TEST_CASE("refined boxes partition the parent") {
  std::mt19937_64 rng(36);
  for (int trial = 0; trial < 100; ++trial) {
    const NodeModel m = random_model(rng, {});
    const Classifier c = m.classifier();
    const Box parent = random_box(rng, m);
    std::vector<Box> children;
    bool root = true;
    const property_checker pc = [&](const Box& box, std::span<const Interval>) {
      if (root) {
        root = false;
        return verdict::unsure;
      }
      children.push_back(box);
      return verdict::pass;
    };
    vote_refine(c.ensemble(0), parent, pc);
    for (std::size_t a = 0; a < children.size(); ++a)
      for (std::size_t b = a + 1; b < children.size(); ++b)
        CHECK(box_meet(children[a], children[b]).is_empty());
    for (int k = 0; k < 200; ++k) {
      const std::vector<double> x = sample_box(rng, m, parent);
      if (!parent.contains(x)) continue;
      std::size_t hits = 0;
      for (const Box& child : children) hits += child.contains(x) ? 1 : 0;
      CHECK(hits == 1);
    }
  }
}

TEST_CASE("tree order hook") {
  std::mt19937_64 rng(37);
  for (int trial = 0; trial < 100; ++trial) {
    const NodeModel m = random_model(rng, {});
    const Classifier c = m.classifier();
    const std::vector<double> x = random_instance(rng, m);
    const int label = predict_class(c, x);
    Box box = Box::point(x);
    box[rng() % m.n] = Interval::top();
    const property_checker pc = [label](const Box&, std::span<const Interval> y) {
      const Interval d = binary_label_set(y[0]);
      if (!d.is_singleton()) return verdict::unsure;
      return d.contains(label) ? verdict::pass : verdict::fail;
    };
    vote_options reversed;
    for (std::size_t t = m.ensembles[0].size(); t-- > 0;) reversed.tree_order.push_back(t);
    CHECK(vote_refine(c.ensemble(0), box, pc) == vote_refine(c.ensemble(0), box, pc, reversed));
  }
  const Ensemble f({example_tree(), example_tree()}, 3, 1);
  const property_checker pass = [](const Box&, std::span<const Interval>) { return verdict::pass; };
  CHECK_THROWS_AS(vote_refine(f, Box::top(3), pass, {{0, 0}}), contract_error);
  CHECK_THROWS_AS(vote_refine(f, Box::top(3), pass, {{0}}), contract_error);
  CHECK_NOTHROW(vote_refine(f, Box::top(3), pass, {{1, 0}}));
}

TEST_CASE("stop hook") {
  // Inconclusive until the output is exact, so every leaf combination that
  // meets the box is visited.
  const property_checker exhaustive = [](const Box&, std::span<const Interval> y) {
    return all_singletons(y) ? verdict::pass : verdict::unsure;
  };
  std::mt19937_64 rng(38);
  std::size_t tried = 0;
  for (std::size_t large = 0; large < 10; ++tried) {
    REQUIRE(tried < 1000);
    const NodeModel m = random_model(rng, {6, 5, 3, 2, 3});
    const Classifier c = m.classifier();
    vote_options options;
    options.stop = [] { return false; };
    vote_stats stats;
    CHECK(vote_refine(c.ensemble(0), Box::top(m.n), exhaustive, options, &stats) ==
          verdict::pass);
    if (stats.checker_calls <= 64) continue;
    ++large;

    std::size_t polls = 0;
    options.stop = [&] { return ++polls > 0; };
    stats = {};
    CHECK_THROWS_AS(vote_refine(c.ensemble(0), Box::top(m.n), exhaustive, options, &stats),
                    refinement_stopped);
    CHECK(polls == 1);
    CHECK(stats.checker_calls < 64);
  }
}
