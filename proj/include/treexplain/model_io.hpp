#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "treexplain/model.hpp"

namespace treexplain {

/// Model document layout:
///
///   {"kind": "binary" | "multiclass", "n_features": n, "classes": m,
///    "ensembles": [[tree, ...], ...]}
///
/// A tree is either a leaf table
///
///   {"leaves": [{"bounds": [{"dim": i, "lo": x | "-inf", "hi": x | "+inf"}],
///                "value": [y, ...]}]}
///
/// or node form, converted to leaves on load:
///
///   {"nodes": [{"dim": i, "threshold": c, "left": k, "right": k} |
///              {"value": [y, ...]}]}
///
/// where node 0 is the root and `left` receives `x[dim] <= c`. Dimensions not
/// bounded by a leaf are unconstrained. A binary model has exactly one
/// ensemble and "classes": 2.
Classifier classifier_from_json(const nlohmann::json& doc,
                                const std::string& source = "");
nlohmann::json classifier_to_json(const Classifier& c);

/// Throws file_error, malformed_model_error, partition_error or
/// dimension_error; messages carry the file path and JSON location.
Classifier load_model(const std::filesystem::path& path);
void save_model(const Classifier& c, const std::filesystem::path& path);

}  // namespace treexplain
