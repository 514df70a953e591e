#include "treexplain/oracle.hpp"

#include <algorithm>

#include "treexplain/errors.hpp"

namespace treexplain {

Box build_box(std::span<const double> instance, const index_set& absent) {
  Box box = Box::point(instance);
  for (std::size_t i : absent) {
    if (i >= instance.size()) throw contract_error("absent index out of range");
    box[i] = Interval::top();
  }
  return box;
}

Interval binary_label_set(const Interval& score) {
  return greater_than(sigmoid_transform(score), Interval::point(0.5));
}

bool is_valid_binary(const Ensemble& f, const Box& x, int label, vote_stats* stats,
                     const std::function<bool()>& stop) {
  if (label != 0 && label != 1) throw contract_error("binary label must be 0 or 1");
  if (f.output_dim() != 1) throw contract_error("binary classifier needs scalar outputs");
  const double d = label;
  const property_checker pc = [d](const Box&, std::span<const Interval> y) {
    const Interval labels = binary_label_set(y[0]);
    if (!labels.is_singleton()) return verdict::unsure;
    return labels.contains(d) ? verdict::pass : verdict::fail;
  };
  vote_options options;
  options.stop = stop;
  return vote_refine(f, x, pc, options, stats) == verdict::pass;
}

bool is_valid_multiclass(const Classifier& c, const Box& x, int label, vote_stats* stats,
                         const std::function<bool()>& stop) {
  if (c.is_binary()) throw contract_error("is_valid_multiclass on a binary classifier");
  const auto ensembles = c.ensembles();
  if (label < 0 || static_cast<std::size_t>(label) >= ensembles.size())
    throw contract_error("class label out of range");
  const auto d = static_cast<std::size_t>(label);
  vote_options options;
  options.stop = stop;

  const property_checker outer = [&](const Box& xd, std::span<const Interval> yd) {
    const Interval score_d = yd[0];
    for (std::size_t i = 0; i < ensembles.size(); ++i) {
      if (i == d) continue;
      const property_checker inner = [&, i](const Box&, std::span<const Interval> yi) {
        // 1 when class d certainly beats class i under smallest-index argmax.
        const Interval wins =
            i < d ? greater_than(score_d, yi[0])
                  : [&] {
                      const Interval loses = greater_than(yi[0], score_d);
                      if (!loses.is_singleton()) return loses;
                      return Interval::point(1.0 - loses.lower());
                    }();
        if (!wins.is_singleton()) return verdict::unsure;
        return wins.contains(1.0) ? verdict::pass : verdict::fail;
      };
      const verdict o = vote_refine(ensembles[i], xd, inner, options, stats);
      if (o != verdict::pass) return o;
    }
    return verdict::pass;
  };
  return vote_refine(ensembles[d], x, outer, options, stats) == verdict::pass;
}

bool is_valid(const Classifier& c, const Box& x, int label, vote_stats* stats,
              const std::function<bool()>& stop) {
  if (c.is_binary()) return is_valid_binary(c.ensemble(0), x, label, stats, stop);
  return is_valid_multiclass(c, x, label, stats, stop);
}

}  // namespace treexplain
