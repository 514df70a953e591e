/*******************************************************************************
 *
 * Abstract transformers for trees and ensembles, and the abstraction
 * refinement driver that splits an input box along the leaf partition of one
 * tree per level until a property checker is conclusive.
 *
 ******************************************************************************/

#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "treexplain/interval.hpp"
#include "treexplain/model.hpp"

namespace treexplain {

enum class verdict { pass, fail, unsure };

const char* to_string(verdict v);

/// Decides a property for every point of an input box given a conservative
/// abstraction of the ensemble outputs over that box.
using property_checker =
    std::function<verdict(const Box& input, std::span<const Interval> output)>;

/// Join of the values of all leaves whose region overlaps x.
std::vector<Interval> tree_transform(const Tree& t, const Box& x);

/// Element-wise interval sum of tree_transform over the trees, in order.
std::vector<Interval> ensemble_transform(const Ensemble& f, const Box& x);

struct vote_options {
  /// Order in which trees are refined; empty means ensemble order.
  std::vector<std::size_t> tree_order;
  /// Polled during refinement; once it returns true, refinement_stopped is
  /// thrown.
  std::function<bool()> stop;
};

class refinement_stopped : public std::runtime_error {
public:
  refinement_stopped() : std::runtime_error("refinement stopped") {}
};

struct vote_stats {
  std::size_t checker_calls = 0;
  std::size_t max_depth = 0;
  /// Checker calls made after every tree has been refined.
  std::size_t leaf_calls = 0;
};

/// Runs the checker on x; while it answers Unsure, picks the next unrefined
/// tree, meets x with each of its leaf regions and recurses on the non-empty
/// parts. Returns the first non-Pass outcome in depth-first order, Unsure if
/// the checker is still inconclusive once every tree is refined, and Pass
/// otherwise.
verdict vote_refine(const Ensemble& f, const Box& x, const property_checker& pc,
                    const vote_options& options = {}, vote_stats* stats = nullptr);

}  // namespace treexplain
