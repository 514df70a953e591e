/*******************************************************************************
 *
 * Interval abstract domain over IEEE-754 doubles.
 *
 * An Interval is either the distinguished empty value (bottom) or a closed
 * range [lower, upper] with lower <= upper. Endpoints may be infinite; top is
 * [-inf, +inf]. Arithmetic is performed without outward rounding so that a
 * singleton interval evaluates bit-for-bit like the concrete program.
 *
 ******************************************************************************/

#pragma once

#include <cstddef>
#include <initializer_list>
#include <iosfwd>
#include <span>
#include <vector>

namespace treexplain {

class Interval {
public:
  /// Top, [-inf, +inf].
  Interval();
  /// Closed range; throws contract_error if lower > upper or either is NaN.
  Interval(double lower, double upper);

  static Interval top();
  static Interval bottom();
  static Interval point(double v);

  bool is_bottom() const { return empty_; }
  bool is_top() const;
  bool is_singleton() const { return !empty_ && lower_ == upper_; }

  // Both throw contract_error on bottom.
  double lower() const;
  double upper() const;

  bool contains(double v) const {
    return !empty_ && lower_ <= v && v <= upper_;
  }
  /// Interval containment: *this is a subset of other.
  bool leq(const Interval& other) const;

  bool operator==(const Interval& other) const;
  bool operator!=(const Interval& other) const { return !(*this == other); }

private:
  struct bottom_tag {};
  explicit Interval(bottom_tag);

  double lower_;
  double upper_;
  bool empty_;
};

std::ostream& operator<<(std::ostream& os, const Interval& iv);

/// [min V, max V]; bottom for an empty set.
Interval abstract(std::span<const double> values);
Interval abstract(std::initializer_list<double> values);

bool contains(const Interval& iv, double v);
Interval add(const Interval& a, const Interval& b);
Interval join(const Interval& a, const Interval& b);
Interval meet(const Interval& a, const Interval& b);

/// Abstract `v > u`: [1,1] when certainly true, [0,0] when certainly false,
/// [0,1] otherwise. Bottom operands are a contract_error.
Interval greater_than(const Interval& v, const Interval& u);

/// Concrete logistic function 1 / (1 + exp(-z)).
double sigmoid(double z);
Interval sigmoid_transform(const Interval& z);

/// Smallest double strictly greater / smaller than v.
double float_successor(double v);
double float_predecessor(double v);

/// One interval per input dimension. A box with any bottom component is empty.
class Box {
public:
  Box() = default;
  explicit Box(std::vector<Interval> dims) : dims_(std::move(dims)) {}
  Box(std::initializer_list<Interval> dims) : dims_(dims) {}

  static Box top(std::size_t n) { return Box(std::vector<Interval>(n)); }
  static Box point(std::span<const double> x);

  std::size_t size() const { return dims_.size(); }
  bool is_empty() const;

  const Interval& operator[](std::size_t i) const { return dims_[i]; }
  Interval& operator[](std::size_t i) { return dims_[i]; }

  std::span<const Interval> dims() const { return dims_; }

  bool contains(std::span<const double> x) const;
  bool operator==(const Box& other) const { return dims_ == other.dims_; }

private:
  std::vector<Interval> dims_;
};

std::ostream& operator<<(std::ostream& os, const Box& box);

/// Component-wise meet. Throws contract_error on dimension mismatch. The
/// result is_empty() when any component is bottom.
Box box_meet(const Box& a, const Box& b);

}  // namespace treexplain
