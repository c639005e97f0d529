#pragma once

#include <stdexcept>
#include <string>

namespace gpdiag {

/// Broad failure classes. The CLI maps these onto exit codes and the service
/// onto HTTP statuses, so every thrown error carries one.
enum class ErrorKind {
  schema,        // a named column does not exist
  parse,         // a cell could not be read as a number
  validation,    // structurally valid input that violates a dataset invariant
  dimension,     // sizes that do not conform
  parameter,     // an unsupported or out-of-range model parameter
  numerical,     // factorization failure and similar
  rank,          // rank-deficient design or degenerate candidate
  precondition,  // operation not applicable to this input (e.g. non-grid)
  optimization,  // no optimizer start produced a finite objective
  degenerate,    // constant column and similar
  domain,        // argument outside the function's domain
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Parse errors also carry the 1-based data row (header excluded).
class ParseError : public Error {
 public:
  ParseError(std::size_t row, const std::string& what)
      : Error(ErrorKind::parse, what), row_(row) {}
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace gpdiag
