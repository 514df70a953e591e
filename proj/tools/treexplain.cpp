// Command-line driver for the batch harness.
//
// Exit status: 0 ok, 2 usage, 3 input error, 4 internal invariant violation.

#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "treexplain/errors.hpp"
#include "treexplain/harness.hpp"

namespace {

constexpr int exit_usage = 2;
constexpr int exit_input = 3;
constexpr int exit_contract = 4;

}  // namespace

int main(int argc, char** argv) {
  using namespace treexplain;

  CLI::App app{"Minimal and minimum explanations for tree-ensemble predictions"};
  RunConfig config;
  config.workers = default_workers();
  std::string model, samples, weights, explanations, out = "out";
  std::string mode = "minimal", order = "asc";

  app.add_option("--model", model, "Model JSON file")->required();
  app.add_option("--samples", samples, "Samples CSV file")->required();
  app.add_option("--mode", mode,
                 "predict | check | minimal | enumerate | minimum-marco | minimum-bb")
      ->capture_default_str();
  app.add_option("--timeout", config.timeout, "Per-query budget in seconds")
      ->capture_default_str();
  app.add_option("--workers", config.workers,
                 "Parallel queries (default from TREEXPLAIN_WORKERS, else 1)")
      ->capture_default_str();
  app.add_option("--weights", weights, "Feature weights (JSON array or comma-separated)");
  app.add_option("--order", order, "Deletion order for minimal: asc | desc | random")
      ->capture_default_str();
  app.add_option("--seed", config.seed, "Seed for the random deletion order")
      ->capture_default_str();
  app.add_option("--out", out, "Output directory")->capture_default_str();
  app.add_flag("--dump-dimacs", config.dump_dimacs, "Write final seed formulas as DIMACS");
  app.add_option("--explanations", explanations, "Explanations JSON-lines file for check");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return exit_usage;
  }

  try {
    const auto m = parse_mode(mode);
    if (!m) throw usage_error("unknown mode '" + mode + "'");
    const auto o = parse_order(order);
    if (!o) throw usage_error("unknown order '" + order + "'");
    config.mode = *m;
    config.order = *o;
    config.model = model;
    config.samples = samples;
    config.out = out;
    if (!weights.empty()) config.weights = weights;
    if (!explanations.empty()) config.explanations = explanations;
    config.validate();

    const RunResult result = run(config);
    const Summary& s = result.summary;
    std::printf("%s: %zu queries, %zu completed, %zu timeouts -> %s\n", to_string(s.mode),
                s.queries, s.completed, s.timeouts, config.out.string().c_str());
    return 0;
  } catch (const usage_error& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return exit_usage;
  } catch (const input_error& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return exit_input;
  } catch (const contract_error& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return exit_contract;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return exit_contract;
  }
}
