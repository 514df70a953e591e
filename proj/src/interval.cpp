#include "treexplain/interval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "treexplain/errors.hpp"

namespace treexplain {

namespace {
constexpr double inf = std::numeric_limits<double>::infinity();
}

Interval::Interval() : lower_(-inf), upper_(inf), empty_(false) {}

Interval::Interval(double lower, double upper)
    : lower_(lower), upper_(upper), empty_(false) {
  if (std::isnan(lower) || std::isnan(upper))
    throw contract_error("interval endpoint is NaN");
  if (lower > upper)
    throw contract_error("interval lower bound exceeds upper bound");
}

Interval::Interval(bottom_tag) : lower_(inf), upper_(-inf), empty_(true) {}

Interval Interval::top() { return Interval(); }
Interval Interval::bottom() { return Interval(bottom_tag{}); }
Interval Interval::point(double v) { return Interval(v, v); }

bool Interval::is_top() const {
  return !empty_ && lower_ == -inf && upper_ == inf;
}

double Interval::lower() const {
  if (empty_) throw contract_error("lower bound of empty interval");
  return lower_;
}

double Interval::upper() const {
  if (empty_) throw contract_error("upper bound of empty interval");
  return upper_;
}

bool Interval::leq(const Interval& other) const {
  if (empty_) return true;
  if (other.empty_) return false;
  return other.lower_ <= lower_ && upper_ <= other.upper_;
}

bool Interval::operator==(const Interval& other) const {
  if (empty_ || other.empty_) return empty_ == other.empty_;
  return lower_ == other.lower_ && upper_ == other.upper_;
}

std::ostream& operator<<(std::ostream& os, const Interval& iv) {
  if (iv.is_bottom()) return os << "_|_";
  return os << '[' << iv.lower() << ", " << iv.upper() << ']';
}

Interval abstract(std::span<const double> values) {
  if (values.empty()) return Interval::bottom();
  auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  return Interval(*lo, *hi);
}

Interval abstract(std::initializer_list<double> values) {
  return abstract(std::span<const double>(values.begin(), values.size()));
}

bool contains(const Interval& iv, double v) { return iv.contains(v); }

Interval add(const Interval& a, const Interval& b) {
  if (a.is_bottom() || b.is_bottom()) return Interval::bottom();
  return Interval(a.lower() + b.lower(), a.upper() + b.upper());
}

Interval join(const Interval& a, const Interval& b) {
  if (a.is_bottom()) return b;
  if (b.is_bottom()) return a;
  return Interval(std::min(a.lower(), b.lower()), std::max(a.upper(), b.upper()));
}

Interval meet(const Interval& a, const Interval& b) {
  if (a.is_bottom() || b.is_bottom()) return Interval::bottom();
  const double lo = std::max(a.lower(), b.lower());
  const double hi = std::min(a.upper(), b.upper());
  if (lo > hi) return Interval::bottom();
  return Interval(lo, hi);
}

Interval greater_than(const Interval& v, const Interval& u) {
  if (v.is_bottom() || u.is_bottom())
    throw contract_error("comparison of empty interval");
  if (v.lower() > u.upper()) return Interval::point(1.0);
  // Non-strict here: when every v is <= every u, v > u is certainly false.
  // This keeps comparisons of equal singletons conclusive.
  if (u.lower() >= v.upper()) return Interval::point(0.0);
  return Interval(0.0, 1.0);
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

Interval sigmoid_transform(const Interval& z) {
  if (z.is_bottom()) return Interval::bottom();
  return Interval(sigmoid(z.lower()), sigmoid(z.upper()));
}

double float_successor(double v) { return std::nextafter(v, inf); }
double float_predecessor(double v) { return std::nextafter(v, -inf); }

Box Box::point(std::span<const double> x) {
  std::vector<Interval> dims;
  dims.reserve(x.size());
  for (double v : x) dims.push_back(Interval::point(v));
  return Box(std::move(dims));
}

bool Box::is_empty() const {
  return std::any_of(dims_.begin(), dims_.end(),
                     [](const Interval& iv) { return iv.is_bottom(); });
}

bool Box::contains(std::span<const double> x) const {
  if (x.size() != dims_.size()) return false;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (!dims_[i].contains(x[i])) return false;
  return true;
}

std::ostream& operator<<(std::ostream& os, const Box& box) {
  os << '(';
  for (std::size_t i = 0; i < box.size(); ++i) {
    if (i) os << ", ";
    os << box[i];
  }
  return os << ')';
}

Box box_meet(const Box& a, const Box& b) {
  if (a.size() != b.size()) throw contract_error("box dimension mismatch");
  std::vector<Interval> dims;
  dims.reserve(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) dims.push_back(meet(a[i], b[i]));
  return Box(std::move(dims));
}

}  // namespace treexplain
