#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace amgopt {

/// Error categories shared by the C++ core and the C API.
enum class ErrorCode {
  invalid_argument = 1,
  dimension_mismatch = 2,
  parse_error = 3,
  io_error = 4,
  solver_failure = 5,
  size_limit = 6,
  not_spd = 7,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class DimensionError : public Error {
 public:
  explicit DimensionError(const std::string& what) : Error(ErrorCode::dimension_mismatch, what) {}
};

class ParseError : public Error {
 public:
  ParseError(int line, const std::string& what)
      : Error(ErrorCode::parse_error, "line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

/// Thrown when an inner iterative solve does not reach its tolerance.
class SolverError : public Error {
 public:
  SolverError(const std::string& what, std::vector<double> history)
      : Error(ErrorCode::solver_failure, what), history_(std::move(history)) {}
  const std::vector<double>& residual_history() const noexcept { return history_; }

 private:
  std::vector<double> history_;
};

inline void require(bool cond, const std::string& what) {
  if (!cond) throw Error(ErrorCode::invalid_argument, what);
}

}  // namespace amgopt
