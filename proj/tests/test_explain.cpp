#include <doctest.h>

#include <algorithm>
#include <map>
#include <random>
#include <set>

#include "fixtures.hpp"
#include "random_models.hpp"
#include "treexplain/errors.hpp"
#include "treexplain/explain.hpp"
#include "treexplain/oracle.hpp"

using namespace treexplain;
using namespace testing_support;

namespace {

const std::vector<double> origin{0, 0, 0};

// The running example's lattice in absent-set form: satisfiable iff S is a subset of
// {0, 1} or of {2}.
bool example_lattice(const index_set& s) {
  const bool has2 = std::find(s.begin(), s.end(), 2) != s.end();
  return !has2 || s.size() == 1;
}

index_set all_features(std::size_t n) {
  index_set s(n);
  for (std::size_t i = 0; i < n; ++i) s[i] = i;
  return s;
}

bool valid_present(const Query& q, const index_set& present) {
  const index_set absent = complement(all_features(q.instance.size()), present);
  return is_valid(*q.classifier, build_box(q.instance, absent), q.label);
}

// Valid, and every single-element weakening is invalid.
bool certified(const Query& q, const Explanation& e) {
  const index_set present = e.indices();
  if (!valid_present(q, present)) return false;
  for (std::size_t k = 0; k < present.size(); ++k) {
    index_set weaker = present;
    weaker.erase(weaker.begin() + static_cast<std::ptrdiff_t>(k));
    if (valid_present(q, weaker)) return false;
  }
  for (const FeatureValue& p : e.pairs)
    if (p.value != q.instance[p.index]) return false;
  return true;
}

std::set<index_set> index_sets(const ExplainResult& r) {
  std::set<index_set> out;
  for (const Explanation& e : r.explanations) out.insert(e.indices());
  return out;
}

double min_cost(const ExplainResult& r) {
  double best = r.explanations.front().cost;
  for (const Explanation& e : r.explanations) best = std::min(best, e.cost);
  return best;
}

CostWeights random_weights(std::mt19937_64& rng, std::size_t n) {
  std::vector<double> w(n);
  for (double& v : w) v = static_cast<double>(rng() % 5);
  return CostWeights(std::move(w));
}

struct RandomQuery {
  NodeModel model;
  Classifier classifier;
  Query query;
};

RandomQuery random_query(std::mt19937_64& rng, std::size_t classes) {
  RandomModelParams p;
  p.classes = classes;
  NodeModel m = random_model(rng, p);
  Classifier c = m.classifier();
  const std::vector<double> x = random_instance(rng, m);
  RandomQuery rq{std::move(m), std::move(c), {}};
  rq.query = make_query(rq.classifier, x);
  return rq;
}

}  // namespace

TEST_CASE("cost") {
  CHECK(cost({2}, CostWeights::unit(3)) == 1.0);
  CHECK(cost({}, CostWeights::unit(3)) == 0.0);
  CHECK(cost({0, 1}, CostWeights({0.5, 2.0, 1.0})) == 2.5);
  CHECK_THROWS_AS(CostWeights({1.0, -1.0}), contract_error);
  CHECK_THROWS_AS(CostWeights({1.0, INFINITY}), contract_error);
}

TEST_CASE("shrink and grow on the running example lattice") {
  CHECK(shrink({0, 1, 2}, example_lattice) == index_set{1, 2});
  CHECK(shrink({0, 2}, example_lattice) == index_set{0, 2});
  CHECK_THROWS_AS(shrink({0}, example_lattice), contract_error);

  CHECK(grow({}, {0, 1, 2}, example_lattice) == index_set{0, 1});
  CHECK(grow({2}, {0, 1, 2}, example_lattice) == index_set{2});
  CHECK(grow({0, 1}, {0, 1, 2}, example_lattice) == index_set{0, 1});
  CHECK_THROWS_AS(grow({1, 2}, {0, 1, 2}, example_lattice), contract_error);
}

TEST_CASE("shrink and grow on random monotone systems") {
  std::mt19937_64 rng(61);
  const index_set universe = all_features(8);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<index_set> forbidden(1 + rng() % 3);
    for (index_set& f : forbidden) {
      for (std::size_t i : universe)
        if (rng() % 3 == 0) f.push_back(i);
      if (f.empty()) f.push_back(rng() % 8);
    }
    const subset_oracle sat = [&](const index_set& s) {
      for (const index_set& f : forbidden)
        if (std::includes(s.begin(), s.end(), f.begin(), f.end())) return false;
      return true;
    };
    const index_set mus = shrink(universe, sat);
    CHECK_FALSE(sat(mus));
    for (std::size_t k = 0; k < mus.size(); ++k) {
      index_set smaller = mus;
      smaller.erase(smaller.begin() + static_cast<std::ptrdiff_t>(k));
      CHECK(sat(smaller));
    }
    const index_set mss = grow({}, universe, sat);
    CHECK(sat(mss));
    for (std::size_t i : complement(universe, mss)) {
      index_set larger = mss;
      larger.insert(std::lower_bound(larger.begin(), larger.end(), i), i);
      CHECK_FALSE(sat(larger));
    }
  }
}

TEST_CASE("deletion filter") {
  const Classifier example = example_classifier();
  const Query q = make_query(example, origin);
  CHECK(q.label == 1);

  const ExplainResult asc = minimal_explanation(q);
  REQUIRE(asc.explanations.size() == 1);
  CHECK(asc.explanations[0].pairs == std::vector<FeatureValue>{{2, 0.0}});
  CHECK(asc.explanations[0].cost == 1.0);
  CHECK_FALSE(asc.timed_out);
  CHECK(asc.oracle_calls == 3);

  const std::vector<std::size_t> order{2, 0, 1};
  const ExplainResult other = minimal_explanation(q, order);
  CHECK(other.explanations[0].pairs == std::vector<FeatureValue>{{0, 0.0}, {1, 0.0}});

  const Classifier bank = bankloan_classifier();
  const ExplainResult b = minimal_explanation(make_query(bank, std::vector<double>{1, 0, 1, 1}));
  CHECK(b.explanations[0].pairs == std::vector<FeatureValue>{{2, 1.0}, {3, 1.0}});

  const std::vector<std::size_t> bad{0, 0, 1};
  CHECK_THROWS_AS(minimal_explanation(q, bad), contract_error);
  const std::vector<std::size_t> short_order{0, 1};
  CHECK_THROWS_AS(minimal_explanation(q, short_order), contract_error);

  Query wrong = q;
  wrong.label = 0;
  CHECK_THROWS_AS(minimal_explanation(wrong), contract_error);
}

TEST_CASE("enumeration") {
  const Classifier example = example_classifier();
  const Query q = make_query(example, origin);
  const ExplainResult all = enumerate_minimal(q, CostWeights::unit(3));
  CHECK(index_sets(all) == std::set<index_set>{{2}, {0, 1}});
  CHECK(all.explanations.size() == 2);
  CHECK(all.mus_count == 2);
  CHECK_FALSE(all.timed_out);

  const Classifier flat = constant_classifier(3, 2.0);
  const ExplainResult empty = enumerate_minimal(make_query(flat, origin), CostWeights::unit(3));
  REQUIRE(empty.explanations.size() == 1);
  CHECK(empty.explanations[0].pairs.empty());
  CHECK(empty.explanations[0].cost == 0.0);

  MarcoOptions keep;
  keep.keep_formula = true;
  ExplainResult kept = enumerate_minimal(q, CostWeights::unit(3), Budget::unlimited(), keep);
  REQUIRE(kept.formula);
  CHECK(kept.formula->var_count() == 3);
  CHECK_FALSE(kept.formula->solve());

  MarcoOptions low;
  low.default_polarity = false;
  CHECK(index_sets(enumerate_minimal(q, CostWeights::unit(3), Budget::unlimited(), low)) ==
        index_sets(all));
}

TEST_CASE("minimum explanations") {
  const Classifier example = example_classifier();
  const Query q = make_query(example, origin);
  const CostWeights unit = CostWeights::unit(3);

  const ExplainResult m = minimum_explanation_marco(q, unit);
  REQUIRE(m.explanations.size() == 1);
  CHECK(m.explanations[0].pairs == std::vector<FeatureValue>{{2, 0.0}});
  CHECK(m.explanations[0].cost == 1.0);

  const CostWeights heavy({1.0, 1.0, 5.0});
  const ExplainResult h = minimum_explanation_marco(q, heavy);
  CHECK(h.explanations[0].pairs == std::vector<FeatureValue>{{0, 0.0}, {1, 0.0}});
  CHECK(h.explanations[0].cost == 2.0);

  const ExplainResult b = minimum_explanation_bb(q, unit);
  CHECK(b.explanations[0].pairs == std::vector<FeatureValue>{{2, 0.0}});
  CHECK(b.explanations[0].cost == 1.0);
  CHECK(minimum_explanation_bb(q, heavy).explanations[0].cost == 2.0);

  const Classifier flat = constant_classifier(3, -1.0);
  const Query fq = make_query(flat, origin);
  CHECK(minimum_explanation_marco(fq, unit).explanations[0].pairs.empty());
  CHECK(minimum_explanation_marco(fq, unit).explanations[0].cost == 0.0);
  CHECK(minimum_explanation_bb(fq, unit).explanations[0].pairs.empty());

  // x1 <= 0 and x2 <= 0: both features are needed.
  SplitTree both;
  both.nodes = {SplitTree::split(0, 0.0, 1, 4), SplitTree::split(1, 0.0, 2, 3),
                SplitTree::leaf({1.0}), SplitTree::leaf({-1.0}), SplitTree::leaf({-1.0})};
  const Classifier conj = Classifier::binary(Ensemble({Tree::from_splits(both, 3)}, 3, 1));
  const Query cq = make_query(conj, origin);
  CHECK(minimum_explanation_bb(cq, unit).explanations[0].indices() == index_set{0, 1});
  CHECK(minimum_explanation_marco(cq, unit).explanations[0].indices() == index_set{0, 1});
  CHECK(minimal_explanation(cq).explanations[0].indices() == index_set{0, 1});
}

TEST_CASE("zero weights still give minimal explanations") {
  const Classifier example = example_classifier();
  const Query q = make_query(example, origin);
  for (const CostWeights& w : {CostWeights({0, 0, 0}), CostWeights({0, 0, 1}), CostWeights({1, 0, 0})}) {
    const ExplainResult m = minimum_explanation_marco(q, w);
    const ExplainResult b = minimum_explanation_bb(q, w);
    CHECK(certified(q, m.explanations[0]));
    CHECK(certified(q, b.explanations[0]));
    CHECK(m.explanations[0].cost == min_cost(enumerate_minimal(q, w)));
    CHECK(b.explanations[0].cost == m.explanations[0].cost);
  }
}

TEST_CASE("budget exhaustion is flagged") {
  const Classifier example = example_classifier();
  const Query q = make_query(example, origin);
  const CostWeights unit = CostWeights::unit(3);
  const Budget none = Budget::seconds(1e-12);
  const ExplainResult d = minimal_explanation(q, {}, nullptr, none);
  CHECK(d.timed_out);
  CHECK(d.explanations.at(0).indices() == index_set{0, 1, 2});
  CHECK(enumerate_minimal(q, unit, none).timed_out);
  CHECK(minimum_explanation_marco(q, unit, none).timed_out);
  CHECK(minimum_explanation_bb(q, unit, none).timed_out);
  CHECK_FALSE(minimal_explanation(q, {}, nullptr, Budget::seconds(3600)).timed_out);
}

TEST_CASE("oracle memo and call counting") {
  const Classifier example = example_classifier();
  const Query q = make_query(example, origin);
  ExplanationOracle memo(q);
  CHECK(memo.referenced() == index_set{0, 1, 2});
  CHECK(memo.valid_without({2}));
  CHECK(memo.valid_without({2}));
  CHECK(memo.calls() == 1);
  ExplanationOracle plain(q, Budget::unlimited(), false);
  plain.valid_without({2});
  plain.valid_without({2});
  CHECK(plain.calls() == 2);
}

TEST_CASE("every emitted explanation is certified") {
  std::mt19937_64 rng(62);
  for (int trial = 0; trial < 150; ++trial) {
    const RandomQuery rq = random_query(rng, trial % 3 == 0 ? 3 : 2);
    const Query& q = rq.query;
    const CostWeights w = trial % 2 ? random_weights(rng, q.instance.size())
                                    : CostWeights::unit(q.instance.size());
    const index_set vf = referenced_vars(rq.classifier);
    std::vector<ExplainResult> results{minimal_explanation(q, {}, &w), enumerate_minimal(q, w),
                                       minimum_explanation_marco(q, w),
                                       minimum_explanation_bb(q, w)};
    for (const ExplainResult& r : results) {
      CHECK_FALSE(r.timed_out);
      for (const Explanation& e : r.explanations) {
        CHECK(certified(q, e));
        const index_set ids = e.indices();
        CHECK(std::includes(vf.begin(), vf.end(), ids.begin(), ids.end()));
        CHECK(e.cost == cost(ids, w));
      }
    }
  }
}

TEST_CASE("enumeration is complete and an antichain") {
  std::mt19937_64 rng(63);
  for (int trial = 0; trial < 100; ++trial) {
    const RandomQuery rq = random_query(rng, trial % 2 ? 2 : 3);
    const ExplainResult r = enumerate_minimal(rq.query, CostWeights::unit(rq.model.n));
    const auto brute = brute_minimal_explanations(rq.model, rq.query.instance, rq.query.label);
    CHECK(index_sets(r) == std::set<index_set>(brute.begin(), brute.end()));
    CHECK(index_sets(r).size() == r.explanations.size());
    for (const Explanation& a : r.explanations)
      for (const Explanation& b : r.explanations) {
        if (&a == &b) continue;
        const index_set x = a.indices(), y = b.indices();
        CHECK_FALSE(std::includes(y.begin(), y.end(), x.begin(), x.end()));
      }
  }
}

TEST_CASE("minimum costs agree across algorithms") {
  std::mt19937_64 rng(64);
  for (int trial = 0; trial < 150; ++trial) {
    const RandomQuery rq = random_query(rng, trial % 2 ? 2 : 3);
    const CostWeights w = random_weights(rng, rq.model.n);
    const double enumerated = min_cost(enumerate_minimal(rq.query, w));
    const double marco = minimum_explanation_marco(rq.query, w).explanations[0].cost;
    const double bb = minimum_explanation_bb(rq.query, w).explanations[0].cost;
    CHECK(marco == enumerated);
    CHECK(bb == marco);
  }
}

TEST_CASE("scaling the weights keeps the minimum") {
  std::mt19937_64 rng(65);
  for (int trial = 0; trial < 100; ++trial) {
    const RandomQuery rq = random_query(rng, 2);
    std::vector<double> base(rq.model.n), scaled(rq.model.n);
    for (std::size_t i = 0; i < base.size(); ++i) {
      base[i] = 1.0 + static_cast<double>(rng() % 4);
      scaled[i] = base[i] * 8.0;
    }
    const CostWeights w(base), ws(scaled);
    const ExplainResult all = enumerate_minimal(rq.query, w);
    std::set<index_set> argmin;
    for (const Explanation& e : all.explanations)
      if (e.cost == min_cost(all)) argmin.insert(e.indices());

    for (bool bb : {false, true}) {
      const Explanation e = bb ? minimum_explanation_bb(rq.query, w).explanations[0]
                               : minimum_explanation_marco(rq.query, w).explanations[0];
      const Explanation f = bb ? minimum_explanation_bb(rq.query, ws).explanations[0]
                               : minimum_explanation_marco(rq.query, ws).explanations[0];
      CHECK(f.cost / 8.0 == e.cost);
      CHECK(argmin.count(e.indices()) == 1);
      CHECK(argmin.count(f.indices()) == 1);
      CHECK(certified(rq.query, f));
    }
  }
}

TEST_CASE("any deletion order gives a minimal explanation") {
  std::mt19937_64 rng(66);
  for (int trial = 0; trial < 150; ++trial) {
    const RandomQuery rq = random_query(rng, trial % 2 ? 2 : 3);
    std::vector<std::size_t> order = all_features(rq.model.n);
    std::shuffle(order.begin(), order.end(), rng);
    const ExplainResult r = minimal_explanation(rq.query, order);
    CHECK(certified(rq.query, r.explanations[0]));
  }
}
