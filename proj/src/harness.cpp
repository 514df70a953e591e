#include "treexplain/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <mutex>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>

#include "treexplain/errors.hpp"
#include "treexplain/model_io.hpp"
#include "treexplain/oracle.hpp"

namespace treexplain {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::pair<run_mode, const char*> mode_names[] = {
    {run_mode::predict, "predict"},
    {run_mode::check, "check"},
    {run_mode::minimal, "minimal"},
    {run_mode::enumerate, "enumerate"},
    {run_mode::minimum_marco, "minimum-marco"},
    {run_mode::minimum_bb, "minimum-bb"},
};

constexpr std::pair<deletion_order, const char*> order_names[] = {
    {deletion_order::asc, "asc"},
    {deletion_order::desc, "desc"},
    {deletion_order::random, "random"},
};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, sep)) out.push_back(trim(field));
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::optional<double> parse_double(const std::string& s) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || std::isnan(v)) return std::nullopt;
  return v;
}

std::optional<long long> parse_int(const std::string& s) {
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw file_error("cannot open file", path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string located(const fs::path& path, std::size_t line) {
  return path.string() + ":" + std::to_string(line);
}

std::string number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json explanation_json(const Explanation& e) {
  json features = json::array();
  json values = json::array();
  for (const FeatureValue& p : e.pairs) {
    features.push_back(p.index);
    values.push_back(p.value);
  }
  return {{"features", features}, {"values", values}, {"cost", e.cost}};
}

Range range_of(const std::vector<double>& xs) {
  Range r;
  r.min = *std::min_element(xs.begin(), xs.end());
  r.max = *std::max_element(xs.begin(), xs.end());
  r.avg = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  return r;
}

std::size_t minimum_count(const std::vector<Explanation>& es) {
  if (es.empty()) return 0;
  double best = es.front().cost;
  for (const Explanation& e : es) best = std::min(best, e.cost);
  return static_cast<std::size_t>(
      std::count_if(es.begin(), es.end(), [&](const Explanation& e) { return e.cost == best; }));
}

bool explains(run_mode m) {
  return m == run_mode::minimal || m == run_mode::enumerate || m == run_mode::minimum_marco ||
         m == run_mode::minimum_bb;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw file_error("cannot write file", path.string());
  out << text;
}

}  // namespace

const char* to_string(run_mode m) {
  for (const auto& [k, name] : mode_names)
    if (k == m) return name;
  return "?";
}

const char* to_string(deletion_order o) {
  for (const auto& [k, name] : order_names)
    if (k == o) return name;
  return "?";
}

std::optional<run_mode> parse_mode(const std::string& s) {
  for (const auto& [k, name] : mode_names)
    if (s == name) return k;
  return std::nullopt;
}

std::optional<deletion_order> parse_order(const std::string& s) {
  for (const auto& [k, name] : order_names)
    if (s == name) return k;
  return std::nullopt;
}

void RunConfig::validate() const {
  if (!(timeout > 0.0)) throw usage_error("timeout must be positive");
  if (workers < 1) throw usage_error("workers must be at least 1");
  if (mode == run_mode::check && !explanations)
    throw usage_error("mode check needs an explanations file");
}

std::size_t default_workers() {
  const char* env = std::getenv("TREEXPLAIN_WORKERS");
  if (!env) return 1;
  const auto v = parse_int(trim(env));
  return v && *v >= 1 ? static_cast<std::size_t>(*v) : 1;
}

SampleSet load_samples(const fs::path& path, std::size_t n_features) {
  std::istringstream in(read_file(path));
  SampleSet s;
  std::string line;
  std::size_t line_no = 0;
  std::optional<std::size_t> label_col;
  std::size_t columns = 0;
  bool header = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split(line, ',');
    if (header) {
      for (std::size_t k = 0; k < fields.size(); ++k) {
        if (fields[k] == "label" && !label_col) label_col = k;
        else s.feature_names.push_back(fields[k]);
      }
      if (s.feature_names.size() != n_features)
        throw format_error("expected " + std::to_string(n_features) + " feature columns, found " +
                               std::to_string(s.feature_names.size()),
                           located(path, line_no));
      columns = fields.size();
      header = false;
      continue;
    }
    if (fields.size() != columns)
      throw format_error("expected " + std::to_string(columns) + " fields, found " +
                             std::to_string(fields.size()),
                         located(path, line_no));
    std::vector<double> row;
    std::optional<int> label;
    for (std::size_t k = 0; k < fields.size(); ++k) {
      if (label_col && k == *label_col) {
        if (fields[k].empty()) continue;
        const auto v = parse_int(fields[k]);
        if (!v || *v < 0) throw format_error("bad label '" + fields[k] + "'", located(path, line_no));
        label = static_cast<int>(*v);
        continue;
      }
      const auto v = parse_double(fields[k]);
      if (!v) throw format_error("bad number '" + fields[k] + "'", located(path, line_no));
      row.push_back(*v);
    }
    s.rows.push_back(std::move(row));
    s.labels.push_back(label);
  }
  if (header) throw format_error("missing header row", path.string());
  return s;
}

CostWeights load_weights(const fs::path& path, std::size_t n_features) {
  const std::string text = trim(read_file(path));
  std::vector<double> w;
  if (!text.empty() && text.front() == '[') {
    try {
      for (const json& v : json::parse(text)) {
        if (!v.is_number()) throw format_error("weights must be numbers", path.string());
        w.push_back(v.get<double>());
      }
    } catch (const json::exception& e) {
      throw format_error(e.what(), path.string());
    }
  } else {
    std::string token;
    std::string flat;
    for (char ch : text) flat.push_back(ch == ',' ? ' ' : ch);
    std::istringstream tokens(flat);
    while (tokens >> token) {
      const auto v = parse_double(token);
      if (!v) throw format_error("bad weight '" + token + "'", path.string());
      w.push_back(*v);
    }
  }
  if (w.size() != n_features)
    throw format_error("expected " + std::to_string(n_features) + " weights, found " +
                           std::to_string(w.size()),
                       path.string());
  for (double x : w)
    if (!(x >= 0.0) || !std::isfinite(x))
      throw format_error("weights must be finite and non-negative", path.string());
  return CostWeights(std::move(w));
}

std::vector<ClaimedExplanation> load_explanations(const fs::path& path) {
  std::istringstream in(read_file(path));
  std::vector<ClaimedExplanation> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      const json doc = json::parse(line);
      const auto sample = doc.at("sample").get<std::size_t>();
      auto read_one = [&](const json& item) {
        ClaimedExplanation c;
        c.sample = sample;
        c.features = item.at("features").get<std::vector<long long>>();
        if (item.contains("values")) c.values = item.at("values").get<std::vector<double>>();
        out.push_back(std::move(c));
      };
      if (doc.contains("explanations")) {
        for (const json& item : doc.at("explanations")) read_one(item);
      } else {
        read_one(doc);
      }
    } catch (const json::exception& e) {
      throw format_error(e.what(), located(path, line_no));
    }
  }
  return out;
}

std::vector<CheckVerdict> verify_explanations(const Classifier& c, std::span<const double> instance,
                                              std::span<const ClaimedExplanation> claims,
                                              const CostWeights& w) {
  const Query q = make_query(c, std::vector<double>(instance.begin(), instance.end()));
  ExplanationOracle oracle(q);
  const index_set& vf = oracle.referenced();
  const auto n = static_cast<long long>(instance.size());

  auto absent_for = [&](const index_set& present) {
    index_set absent;
    std::set_difference(vf.begin(), vf.end(), present.begin(), present.end(),
                        std::back_inserter(absent));
    return absent;
  };

  std::vector<CheckVerdict> out;
  for (const ClaimedExplanation& claim : claims) {
    CheckVerdict v;
    v.features = claim.features;
    index_set present;
    for (long long i : claim.features) {
      if (i < 0 || i >= n) {
        v.error = "feature index " + std::to_string(i) + " out of range";
        break;
      }
      present.push_back(static_cast<std::size_t>(i));
    }
    if (v.error.empty() && claim.values) {
      if (claim.values->size() != claim.features.size()) {
        v.error = "features and values differ in length";
      } else {
        for (std::size_t k = 0; k < present.size(); ++k)
          if ((*claim.values)[k] != instance[present[k]]) {
            v.error = "value for feature " + std::to_string(present[k]) +
                      " differs from the instance";
            break;
          }
      }
    }
    std::sort(present.begin(), present.end());
    if (v.error.empty() && std::adjacent_find(present.begin(), present.end()) != present.end())
      v.error = "duplicate feature index";
    if (!v.error.empty()) {
      out.push_back(std::move(v));
      continue;
    }
    v.cost = cost(present, w);
    v.valid = oracle.valid_without(absent_for(present));
    v.minimal = v.valid;
    for (std::size_t k = 0; v.minimal && k < present.size(); ++k) {
      index_set weaker = present;
      weaker.erase(weaker.begin() + static_cast<std::ptrdiff_t>(k));
      if (oracle.valid_without(absent_for(weaker))) v.minimal = false;
    }
    out.push_back(std::move(v));
  }
  return out;
}

json QueryReport::to_json() const {
  json doc = {{"sample", sample}, {"mode", to_string(mode)}, {"instance", instance},
              {"label", label}};
  if (given_label) doc["given_label"] = *given_label;
  if (mode == run_mode::predict) {
    doc["scores"] = scores;
    if (scores.size() == 1)
      doc["probabilities"] = {1.0 - sigmoid(scores[0]), sigmoid(scores[0])};
    else
      doc["probabilities"] = softmax(scores);
    return doc;
  }
  if (mode == run_mode::check) {
    json checks_doc = json::array();
    for (const CheckVerdict& v : checks) {
      json row = {{"features", v.features}};
      if (!v.error.empty()) {
        row["error"] = v.error;
      } else {
        row["valid"] = v.valid;
        row["minimal"] = v.minimal;
        row["cost"] = v.cost;
      }
      checks_doc.push_back(std::move(row));
    }
    doc["checks"] = std::move(checks_doc);
    return doc;
  }
  json es = json::array();
  for (const Explanation& e : explanations) es.push_back(explanation_json(e));
  doc["explanations"] = std::move(es);
  doc["oracle_calls"] = oracle_calls;
  doc["mus"] = mus_count;
  doc["timed_out"] = timed_out;
  doc["seconds"] = seconds;
  return doc;
}

Summary summarize(std::span<const QueryReport> reports, run_mode mode,
                  std::size_t referenced_features, std::size_t total_features) {
  Summary s;
  s.mode = mode;
  s.queries = reports.size();
  s.referenced_features = referenced_features;
  s.total_features = total_features;
  std::vector<double> seconds, counts, minimum;
  for (const QueryReport& r : reports) {
    if (r.timed_out) {
      ++s.timeouts;
      continue;
    }
    ++s.completed;
    seconds.push_back(r.seconds);
    counts.push_back(static_cast<double>(r.explanations.size()));
    minimum.push_back(static_cast<double>(minimum_count(r.explanations)));
  }
  if (!seconds.empty()) {
    s.seconds = range_of(seconds);
    if (explains(mode)) {
      s.explanations = range_of(counts);
      s.minimum = range_of(minimum);
    }
  }
  return s;
}

std::vector<BurnupPoint> burnup(std::span<const QueryReport> reports) {
  std::vector<double> times;
  for (const QueryReport& r : reports)
    if (!r.timed_out) times.push_back(r.seconds);
  std::sort(times.begin(), times.end());
  std::vector<BurnupPoint> out{{0.0, 0.0}};
  double total = 0.0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    total += times[k];
    out.push_back({total, static_cast<double>(k + 1) / static_cast<double>(reports.size())});
  }
  return out;
}

QueryReport explain_sample(const Classifier& c, std::size_t sample, std::vector<double> instance,
                           std::optional<int> given_label, const RunConfig& config,
                           const CostWeights& w, std::span<const ClaimedExplanation> claims) {
  const auto start = std::chrono::steady_clock::now();
  QueryReport r;
  r.sample = sample;
  r.mode = config.mode;
  r.given_label = given_label;
  const Query q = make_query(c, std::move(instance));
  r.instance = q.instance;
  r.label = q.label;

  const Budget budget = Budget::seconds(config.timeout);
  const MarcoOptions marco{.default_polarity = true, .keep_formula = config.dump_dimacs};
  ExplainResult result;
  switch (config.mode) {
    case run_mode::predict:
      r.scores = class_scores(c, q.instance);
      break;
    case run_mode::check: {
      std::vector<ClaimedExplanation> mine;
      for (const ClaimedExplanation& claim : claims)
        if (claim.sample == sample) mine.push_back(claim);
      r.checks = verify_explanations(c, q.instance, mine, w);
      break;
    }
    case run_mode::minimal: {
      std::vector<std::size_t> order;
      if (config.order != deletion_order::asc) {
        order.resize(q.instance.size());
        std::iota(order.begin(), order.end(), 0);
        if (config.order == deletion_order::desc) {
          std::reverse(order.begin(), order.end());
        } else {
          std::mt19937_64 rng(config.seed + sample);
          std::shuffle(order.begin(), order.end(), rng);
        }
      }
      result = minimal_explanation(q, order, &w, budget);
      break;
    }
    case run_mode::enumerate:
      result = enumerate_minimal(q, w, budget, marco);
      break;
    case run_mode::minimum_marco:
      result = minimum_explanation_marco(q, w, budget, marco);
      break;
    case run_mode::minimum_bb:
      result = minimum_explanation_bb(q, w, budget);
      break;
  }
  r.explanations = std::move(result.explanations);
  r.oracle_calls = result.oracle_calls;
  r.mus_count = result.mus_count;
  r.timed_out = result.timed_out;
  r.formula = std::move(result.formula);
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

std::vector<QueryReport> run_queries(const Classifier& c, const SampleSet& samples,
                                     const RunConfig& config, const CostWeights& w,
                                     std::span<const ClaimedExplanation> claims) {
  config.validate();
  const std::size_t count = samples.rows.size();
  std::vector<QueryReport> reports(count);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto work = [&] {
    for (std::size_t k = next++; k < count; k = next++) {
      try {
        reports[k] = explain_sample(c, k, samples.rows[k], samples.labels[k], config, w, claims);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = count;
      }
    }
  };

  const std::size_t threads = std::min(config.workers, std::max<std::size_t>(count, 1));
  if (threads <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(work);
    for (std::thread& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  return reports;
}

RunResult run(const RunConfig& config) {
  config.validate();
  const Classifier c = load_model(config.model);
  const std::size_t n = c.input_dim();
  const SampleSet samples = load_samples(config.samples, n);
  const CostWeights w = config.weights ? load_weights(*config.weights, n) : CostWeights::unit(n);
  std::vector<ClaimedExplanation> claims;
  if (config.explanations) claims = load_explanations(*config.explanations);

  RunResult result;
  result.reports = run_queries(c, samples, config, w, claims);
  result.summary = summarize(result.reports, config.mode, referenced_vars(c).size(), n);

  std::error_code ec;
  fs::create_directories(config.out, ec);
  if (ec) throw file_error("cannot create output directory", config.out.string());

  std::string reports_text;
  for (const QueryReport& r : result.reports) reports_text += r.to_json().dump() + "\n";
  write_text(config.out / "reports.jsonl", reports_text);

  const Summary& s = result.summary;
  auto cells = [](const std::optional<Range>& r) {
    if (!r) return std::string(",,");
    return number(r->min) + "," + number(r->avg) + "," + number(r->max);
  };
  write_text(config.out / "summary.csv",
             "mode,queries,completed,timeouts,time_min,time_avg,time_max,explanations_min,"
             "explanations_avg,explanations_max,minimum_min,minimum_avg,minimum_max,"
             "referenced_features,total_features\n" +
                 std::string(to_string(s.mode)) + "," + std::to_string(s.queries) + "," +
                 std::to_string(s.completed) + "," + std::to_string(s.timeouts) + "," +
                 cells(s.seconds) + "," + cells(s.explanations) + "," + cells(s.minimum) + "," +
                 std::to_string(s.referenced_features) + "," + std::to_string(s.total_features) +
                 "\n");

  if (explains(config.mode)) {
    std::string costs = "sample,explanation,size,cost,minimum,timed_out\n";
    for (const QueryReport& r : result.reports) {
      double best = 0.0;
      for (std::size_t k = 0; k < r.explanations.size(); ++k)
        best = k == 0 ? r.explanations[k].cost : std::min(best, r.explanations[k].cost);
      for (std::size_t k = 0; k < r.explanations.size(); ++k) {
        const Explanation& e = r.explanations[k];
        costs += std::to_string(r.sample) + "," + std::to_string(k) + "," +
                 std::to_string(e.pairs.size()) + "," + number(e.cost) + "," +
                 (e.cost == best ? "1" : "0") + "," + (r.timed_out ? "1" : "0") + "\n";
      }
    }
    write_text(config.out / "costs.csv", costs);
  }

  std::string burn = "seconds,fraction\n";
  for (const BurnupPoint& p : burnup(result.reports))
    burn += number(p.seconds) + "," + number(p.fraction) + "\n";
  write_text(config.out / "burnup.csv", burn);

  if (config.dump_dimacs) {
    const fs::path dir = config.out / "dimacs";
    fs::create_directories(dir, ec);
    if (ec) throw file_error("cannot create output directory", dir.string());
    for (const QueryReport& r : result.reports) {
      if (!r.formula) continue;
      std::ostringstream os;
      r.formula->write_dimacs(os);
      write_text(dir / ("sample_" + std::to_string(r.sample) + ".cnf"), os.str());
    }
  }
  return result;
}

}  // namespace treexplain
