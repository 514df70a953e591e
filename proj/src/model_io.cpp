#include "treexplain/model_io.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include "treexplain/errors.hpp"

namespace treexplain {

using nlohmann::json;

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

// JSON-pointer style location inside a document, prefixed by the file name.
class Location {
public:
  explicit Location(std::string source) : source_(std::move(source)) {}

  Location operator/(const std::string& key) const {
    Location l = *this;
    l.pointer_ += "/" + key;
    return l;
  }
  Location operator/(std::size_t index) const { return *this / std::to_string(index); }

  std::string str() const {
    std::string p = pointer_.empty() ? "/" : pointer_;
    return source_.empty() ? p : source_ + ":" + p;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw malformed_model_error(what, str());
  }

private:
  std::string source_;
  std::string pointer_;
};

const json& member(const json& obj, const char* key, const Location& at) {
  if (!obj.is_object()) at.fail("expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) at.fail(std::string("missing \"") + key + "\"");
  return *it;
}

std::size_t as_index(const json& v, const Location& at) {
  if (!v.is_number_integer() || v.get<long long>() < 0)
    at.fail("expected a non-negative integer");
  return v.get<std::size_t>();
}

double as_bound(const json& v, const Location& at) {
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "-inf") return -inf;
    if (s == "+inf" || s == "inf") return inf;
    at.fail("unknown bound \"" + s + "\"");
  }
  if (!v.is_number()) at.fail("expected a number, \"-inf\" or \"+inf\"");
  return v.get<double>();
}

json bound_to_json(double v) {
  if (v == -inf) return "-inf";
  if (v == inf) return "+inf";
  return v;
}

std::vector<double> as_values(const json& v, const Location& at) {
  if (!v.is_array() || v.empty()) at.fail("expected a non-empty array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) (at / i).fail("expected a number");
    out.push_back(v[i].get<double>());
    if (!std::isfinite(out.back())) (at / i).fail("leaf value is not finite");
  }
  return out;
}

// Re-raise errors from the model constructors with the document location.
template <typename F>
auto located(const Location& at, F&& build) {
  try {
    return build();
  } catch (const partition_error& e) {
    throw partition_error(e.what(), at.str());
  } catch (const dimension_error& e) {
    throw dimension_error(e.what(), at.str());
  } catch (const malformed_model_error& e) {
    throw malformed_model_error(e.what(), at.str());
  } catch (const contract_error& e) {
    throw malformed_model_error(e.what(), at.str());
  }
}

Tree leaf_table_from_json(const json& leaves_doc, std::size_t n, const Location& at) {
  if (!leaves_doc.is_array()) at.fail("\"leaves\" must be an array");
  std::vector<Leaf> leaves;
  std::size_t m = 0;
  for (std::size_t i = 0; i < leaves_doc.size(); ++i) {
    const Location leaf_at = at / i;
    const json& leaf = leaves_doc[i];
    const json& bounds_doc = member(leaf, "bounds", leaf_at);
    if (!bounds_doc.is_array()) (leaf_at / "bounds").fail("expected an array");
    std::vector<double> value = as_values(member(leaf, "value", leaf_at), leaf_at / "value");
    if (i == 0) m = value.size();

    std::vector<DimBound> bounds;
    for (std::size_t j = 0; j < bounds_doc.size(); ++j) {
      const Location b_at = leaf_at / "bounds" / j;
      const json& b = bounds_doc[j];
      if (b.is_null()) continue;
      const std::size_t dim = as_index(member(b, "dim", b_at), b_at / "dim");
      if (dim >= n)
        throw dimension_error("bound on dimension " + std::to_string(dim) +
                                  " but n_features is " + std::to_string(n),
                              b_at.str());
      const double lo = b.contains("lo") ? as_bound(b["lo"], b_at / "lo") : -inf;
      const double hi = b.contains("hi") ? as_bound(b["hi"], b_at / "hi") : inf;
      if (std::isnan(lo) || std::isnan(hi) || lo > hi) b_at.fail("empty bound");
      bounds.push_back({dim, Interval(lo, hi)});
    }
    leaves.push_back(located(leaf_at, [&] { return Leaf(std::move(bounds), std::move(value)); }));
  }
  return located(at, [&] { return Tree(std::move(leaves), n, m); });
}

Tree node_form_from_json(const json& nodes_doc, std::size_t n, const Location& at) {
  if (!nodes_doc.is_array()) at.fail("\"nodes\" must be an array");
  SplitTree splits;
  for (std::size_t i = 0; i < nodes_doc.size(); ++i) {
    const Location node_at = at / i;
    const json& node = nodes_doc[i];
    if (!node.is_object()) node_at.fail("expected an object");
    if (node.contains("value")) {
      splits.nodes.push_back(SplitTree::leaf(as_values(node["value"], node_at / "value")));
      continue;
    }
    const std::size_t dim = as_index(member(node, "dim", node_at), node_at / "dim");
    const json& thr = member(node, "threshold", node_at);
    if (!thr.is_number()) (node_at / "threshold").fail("expected a number");
    splits.nodes.push_back(SplitTree::split(
        dim, thr.get<double>(), as_index(member(node, "left", node_at), node_at / "left"),
        as_index(member(node, "right", node_at), node_at / "right")));
  }
  return located(at, [&] { return Tree::from_splits(splits, n); });
}

}  // namespace

Classifier classifier_from_json(const json& doc, const std::string& source) {
  const Location root(source);
  const json& kind_doc = member(doc, "kind", root);
  if (!kind_doc.is_string()) (root / "kind").fail("expected a string");
  const std::string kind = kind_doc.get<std::string>();
  if (kind != "binary" && kind != "multiclass")
    (root / "kind").fail("expected \"binary\" or \"multiclass\"");

  const std::size_t n = as_index(member(doc, "n_features", root), root / "n_features");
  const std::size_t classes = as_index(member(doc, "classes", root), root / "classes");
  const json& ens_doc = member(doc, "ensembles", root);
  if (!ens_doc.is_array()) (root / "ensembles").fail("expected an array");

  std::vector<Ensemble> ensembles;
  for (std::size_t e = 0; e < ens_doc.size(); ++e) {
    const Location e_at = root / "ensembles" / e;
    if (!ens_doc[e].is_array()) e_at.fail("an ensemble is an array of trees");
    std::vector<Tree> trees;
    for (std::size_t t = 0; t < ens_doc[e].size(); ++t) {
      const Location t_at = e_at / t;
      const json& tree = ens_doc[e][t];
      if (!tree.is_object()) t_at.fail("expected an object");
      if (tree.contains("leaves"))
        trees.push_back(leaf_table_from_json(tree["leaves"], n, t_at / "leaves"));
      else if (tree.contains("nodes"))
        trees.push_back(node_form_from_json(tree["nodes"], n, t_at / "nodes"));
      else
        t_at.fail("tree needs \"leaves\" or \"nodes\"");
    }
    const std::size_t m = trees.empty() ? 1 : trees.front().output_dim();
    ensembles.push_back(located(e_at, [&] { return Ensemble(std::move(trees), n, m); }));
  }

  if (kind == "binary") {
    if (classes != 2)
      throw dimension_error("binary model must declare 2 classes", (root / "classes").str());
    if (ensembles.size() != 1)
      throw dimension_error("binary model must have exactly one ensemble",
                            (root / "ensembles").str());
    return located(root, [&] { return Classifier::binary(std::move(ensembles.front())); });
  }
  if (ensembles.size() != classes)
    throw dimension_error("expected " + std::to_string(classes) + " ensembles, found " +
                              std::to_string(ensembles.size()),
                          (root / "ensembles").str());
  return located(root, [&] { return Classifier::multiclass(std::move(ensembles)); });
}

json classifier_to_json(const Classifier& c) {
  json doc;
  doc["kind"] = c.is_binary() ? "binary" : "multiclass";
  doc["n_features"] = c.input_dim();
  doc["classes"] = c.class_count();
  json ensembles = json::array();
  for (const Ensemble& f : c.ensembles()) {
    json trees = json::array();
    for (const Tree& t : f.trees()) {
      json leaves = json::array();
      for (const Leaf& leaf : t.leaves()) {
        json bounds = json::array();
        for (const DimBound& b : leaf.bounds())
          bounds.push_back({{"dim", b.dim},
                            {"lo", bound_to_json(b.range.lower())},
                            {"hi", bound_to_json(b.range.upper())}});
        leaves.push_back({{"bounds", std::move(bounds)},
                          {"value", std::vector<double>(leaf.value().begin(), leaf.value().end())}});
      }
      trees.push_back({{"leaves", std::move(leaves)}});
    }
    ensembles.push_back(std::move(trees));
  }
  doc["ensembles"] = std::move(ensembles);
  return doc;
}

Classifier load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw file_error("cannot open model file", path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw malformed_model_error(e.what(), path.string());
  }
  return classifier_from_json(doc, path.string());
}

void save_model(const Classifier& c, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw file_error("cannot write model file", path.string());
  out << classifier_to_json(c).dump(1) << '\n';
  if (!out) throw file_error("write failed", path.string());
}

}  // namespace treexplain
