/*******************************************************************************
 *
 * Valid-explanation oracles. Given a box in which the freed features span
 * their whole domain and the remaining ones are fixed to the instance values,
 * decide whether every point of the box is classified as the given label.
 * Both oracles are sound and complete: they drive vote_refine until the
 * output abstractions are precise enough to decide.
 *
 ******************************************************************************/

#pragma once

#include <functional>
#include <span>

#include "treexplain/interval.hpp"
#include "treexplain/model.hpp"
#include "treexplain/vote.hpp"

namespace treexplain {

/// Feature i is top if i is in `absent`, the singleton [x_i, x_i] otherwise.
/// `absent` must be sorted.
Box build_box(std::span<const double> instance, const index_set& absent);

/// Labels possible for a binary classifier whose raw score lies in `score`:
/// [0,0], [1,1] or [0,1], computed as sigmoid_transform(score) > [0.5, 0.5].
Interval binary_label_set(const Interval& score);

/// Every point of x is labelled `label` (0 or 1) by the binary classifier
/// over f.
bool is_valid_binary(const Ensemble& f, const Box& x, int label,
                     vote_stats* stats = nullptr, const std::function<bool()>& stop = {});

/// Every point of x is labelled `label` (0-based class index) by the
/// one-vs-rest classifier c. For a rival class i < label the label's score
/// must be strictly greater; for i > label it must not be smaller, matching
/// the smallest-index tie rule of predict_class.
bool is_valid_multiclass(const Classifier& c, const Box& x, int label,
                         vote_stats* stats = nullptr, const std::function<bool()>& stop = {});

/// Dispatches on the classifier kind. `stop` is forwarded to vote_refine, so
/// a call may end in refinement_stopped.
bool is_valid(const Classifier& c, const Box& x, int label, vote_stats* stats = nullptr,
              const std::function<bool()>& stop = {});

}  // namespace treexplain
