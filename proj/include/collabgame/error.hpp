#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace collabgame {

enum class ErrorKind {
  // usage
  usage,
  invalid_order,
  dimension,
  capacity,
  nesting,
  config,
  // data validation
  parse,
  range,
  duplicate_key,
  team_size,
  missing_rating,
  incomplete_data,
  grouping,
  data_mismatch,
  empty_input,
  io,
  // numerical
  rank,
  convergence,
};

/// Process exit code for an error kind: 1 usage, 2 data validation, 3 numerical.
constexpr int exit_code(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::usage:
    case ErrorKind::invalid_order:
    case ErrorKind::dimension:
    case ErrorKind::capacity:
    case ErrorKind::nesting:
    case ErrorKind::config:
      return 1;
    case ErrorKind::rank:
    case ErrorKind::convergence:
      return 3;
    default:
      return 2;
  }
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }
  int exit_code() const noexcept { return collabgame::exit_code(kind_); }

 private:
  ErrorKind kind_;
};

/// Raised by load() with every invariant violation found, one message per entry.
class ValidationError : public Error {
 public:
  ValidationError(ErrorKind kind, std::vector<std::string> issues)
      : Error(kind, join(issues)), issues_(std::move(issues)) {}

  const std::vector<std::string>& issues() const noexcept { return issues_; }

 private:
  static std::string join(const std::vector<std::string>& issues) {
    std::string out;
    for (const auto& s : issues) {
      if (!out.empty()) out += '\n';
      out += s;
    }
    return out;
  }

  std::vector<std::string> issues_;
};

class RankError : public Error {
 public:
  explicit RankError(std::vector<std::string> columns)
      : Error(ErrorKind::rank, message(columns)), columns_(std::move(columns)) {}

  const std::vector<std::string>& columns() const noexcept { return columns_; }

 private:
  static std::string message(const std::vector<std::string>& cols) {
    std::string m = "design matrix is rank deficient; collinear columns:";
    for (const auto& c : cols) m += " " + c;
    return m;
  }

  std::vector<std::string> columns_;
};

/// Carries the best variance ratio and log-likelihood reached before giving up.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double best_ratio, double best_loglik)
      : Error(ErrorKind::convergence, what), best_ratio_(best_ratio), best_loglik_(best_loglik) {}

  double best_ratio() const noexcept { return best_ratio_; }
  double best_loglik() const noexcept { return best_loglik_; }

 private:
  double best_ratio_;
  double best_loglik_;
};

}  // namespace collabgame
