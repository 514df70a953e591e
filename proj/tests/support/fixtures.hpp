// Hand-written models used across the tests.

#pragma once

#include <filesystem>
#include <string>

#include "treexplain/model.hpp"

namespace testing_support {

/// Directory holding the checked-in model and sample files.
std::filesystem::path data_dir();

/// A single tree encoding (x1 <= 0 and x2 <= 0) or x3 <= 0 with leaf values
/// +1 / -1, features zero-based.
treexplain::SplitTree example_splits();
treexplain::Tree example_tree();
treexplain::Classifier example_classifier();

/// The bank-loan tree over (low income, criminal record, low education,
/// missed payments), every feature 0/1 and split at 0.5. Leaf value 1 means
/// the loan is denied.
treexplain::SplitTree bankloan_splits();
treexplain::Classifier bankloan_classifier();

/// One leaf covering the whole space.
treexplain::Classifier constant_classifier(std::size_t n, double value);

}  // namespace testing_support
