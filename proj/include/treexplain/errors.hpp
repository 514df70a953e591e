#pragma once

#include <stdexcept>
#include <string>

namespace treexplain {

/// A violated precondition or internal invariant: a bug in the caller or in
/// this library, never a property of the input data.
class contract_error : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

/// Base of everything that can go wrong while reading a model or its inputs.
/// `where()` names the offending file position (path and JSON pointer).
class input_error : public std::runtime_error {
public:
  input_error(const std::string& what, std::string where)
      : std::runtime_error(where.empty() ? what : where + ": " + what),
        where_(std::move(where)) {}

  const std::string& where() const { return where_; }

private:
  std::string where_;
};

/// File missing or unreadable.
class file_error : public input_error {
public:
  using input_error::input_error;
};

/// Document does not match the model schema.
class malformed_model_error : public input_error {
public:
  using input_error::input_error;
};

/// Leaf regions of a tree overlap or leave part of the input space uncovered.
class partition_error : public input_error {
public:
  using input_error::input_error;
};

/// Inconsistent input/output dimensions across leaves, trees, or ensembles.
class dimension_error : public input_error {
public:
  using input_error::input_error;
};

/// A samples, weights or explanations file that does not parse.
class format_error : public input_error {
public:
  using input_error::input_error;
};

}  // namespace treexplain
