/*******************************************************************************
 *
 * Batch harness: runs one explanation mode over every row of a sample file
 * and writes per-query reports, an aggregate summary, the cost distribution
 * and the burnup series.
 *
 * Output directory layout:
 *
 *   reports.jsonl   one JSON object per sample, in sample order
 *   summary.csv     min/avg/max runtime and explanation counts, timeouts
 *   costs.csv       one row per emitted explanation
 *   burnup.csv      accumulated time against fraction of queries explained
 *   dimacs/         final seed formulas, with --dump-dimacs
 *
 ******************************************************************************/

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "treexplain/explain.hpp"
#include "treexplain/model.hpp"

namespace treexplain {

enum class run_mode { predict, check, minimal, enumerate, minimum_marco, minimum_bb };
enum class deletion_order { asc, desc, random };

const char* to_string(run_mode m);
const char* to_string(deletion_order o);
std::optional<run_mode> parse_mode(const std::string& s);
std::optional<deletion_order> parse_order(const std::string& s);

/// Invalid run configuration, reported as a usage error.
class usage_error : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

struct RunConfig {
  std::filesystem::path model;
  std::filesystem::path samples;
  run_mode mode = run_mode::minimal;
  std::optional<std::filesystem::path> weights;
  std::optional<std::filesystem::path> explanations;  ///< required by check
  double timeout = 3600.0;                            ///< seconds per query
  std::size_t workers = 1;
  deletion_order order = deletion_order::asc;
  std::uint64_t seed = 0;
  std::filesystem::path out = "out";
  bool dump_dimacs = false;

  /// Throws usage_error.
  void validate() const;
};

/// Worker count from TREEXPLAIN_WORKERS, or 1 when unset or unparsable.
std::size_t default_workers();

struct SampleSet {
  std::vector<std::string> feature_names;
  std::vector<std::vector<double>> rows;
  /// Per row, the value of the optional "label" column.
  std::vector<std::optional<int>> labels;
};

/// CSV with a header row of feature names. A column named "label" is kept
/// apart from the features. Throws file_error or format_error.
SampleSet load_samples(const std::filesystem::path& path, std::size_t n_features);

/// A JSON array of numbers, or numbers separated by commas and whitespace.
CostWeights load_weights(const std::filesystem::path& path, std::size_t n_features);

/// One explanation to verify: the features it keeps and, optionally, the
/// values it claims for them.
struct ClaimedExplanation {
  std::size_t sample = 0;
  std::vector<long long> features;
  std::optional<std::vector<double>> values;
};

/// JSON lines. Each line has "sample" and either "features" (an array of
/// indices, with optional "values") or "explanations" (an array of such
/// objects), so report files can be fed back in.
std::vector<ClaimedExplanation> load_explanations(const std::filesystem::path& path);

struct CheckVerdict {
  std::vector<long long> features;
  bool valid = false;
  bool minimal = false;
  double cost = 0.0;
  std::string error;  ///< non-empty when the row could not be checked
};

struct QueryReport {
  std::size_t sample = 0;
  run_mode mode = run_mode::predict;
  std::vector<double> instance;
  int label = 0;
  std::optional<int> given_label;
  std::vector<double> scores;  ///< predict mode
  std::vector<Explanation> explanations;
  std::vector<CheckVerdict> checks;
  std::size_t oracle_calls = 0;
  std::size_t mus_count = 0;
  double seconds = 0.0;
  bool timed_out = false;
  std::optional<SeedFormula> formula;

  nlohmann::json to_json() const;
};

/// Verdicts for the claimed explanations of one sample. Out-of-range indices
/// and values that differ from the instance become per-row errors.
std::vector<CheckVerdict> verify_explanations(const Classifier& c, std::span<const double> instance,
                                              std::span<const ClaimedExplanation> claims,
                                              const CostWeights& w);

struct Range {
  double min = 0.0;
  double avg = 0.0;
  double max = 0.0;
};

struct Summary {
  run_mode mode = run_mode::predict;
  std::size_t queries = 0;
  std::size_t completed = 0;
  std::size_t timeouts = 0;
  /// Over completed queries; empty when none completed.
  std::optional<Range> seconds;
  std::optional<Range> explanations;
  /// Explanations per query whose cost equals the query's smallest cost.
  std::optional<Range> minimum;
  std::size_t referenced_features = 0;
  std::size_t total_features = 0;
};

Summary summarize(std::span<const QueryReport> reports, run_mode mode,
                  std::size_t referenced_features, std::size_t total_features);

struct BurnupPoint {
  double seconds;   ///< accumulated time of the k fastest completed queries
  double fraction;  ///< k / number of queries
};

std::vector<BurnupPoint> burnup(std::span<const QueryReport> reports);

/// Explains one sample. `rng_seed` drives the random deletion order.
QueryReport explain_sample(const Classifier& c, std::size_t sample, std::vector<double> instance,
                           std::optional<int> given_label, const RunConfig& config,
                           const CostWeights& w, std::span<const ClaimedExplanation> claims = {});

/// Explains every sample with config.workers threads; reports are returned in
/// sample order.
std::vector<QueryReport> run_queries(const Classifier& c, const SampleSet& samples,
                                     const RunConfig& config, const CostWeights& w,
                                     std::span<const ClaimedExplanation> claims = {});

struct RunResult {
  std::vector<QueryReport> reports;
  Summary summary;
};

/// Loads inputs, runs every query and writes the output directory. Throws
/// usage_error, input_error subclasses, or contract_error.
RunResult run(const RunConfig& config);

}  // namespace treexplain
