#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace rdpgboot {

/// Base class for every failure raised by the library. `kind()` is a short
/// stable token used in the CLI's machine-readable error line.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

enum class ParseErrorKind { MissingHeader, Malformed, IndexOutOfRange, SelfLoop, DuplicateEdge };

inline const char* to_string(ParseErrorKind k) {
  switch (k) {
    case ParseErrorKind::MissingHeader: return "missing-header";
    case ParseErrorKind::Malformed: return "malformed-line";
    case ParseErrorKind::IndexOutOfRange: return "index-out-of-range";
    case ParseErrorKind::SelfLoop: return "self-loop";
    case ParseErrorKind::DuplicateEdge: return "duplicate-edge";
  }
  return "parse";
}

class ParseError : public Error {
 public:
  ParseError(ParseErrorKind k, std::size_t line, const std::string& msg)
      : Error(to_string(k), "line " + std::to_string(line) + ": " + msg), kind_(k), line_(line) {}
  ParseErrorKind parse_kind() const noexcept { return kind_; }
  std::size_t line() const noexcept { return line_; }

 private:
  ParseErrorKind kind_;
  std::size_t line_;
};

class DimensionError : public Error {
 public:
  explicit DimensionError(const std::string& msg) : Error("dimension", msg) {}
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(std::size_t iterations, const std::string& msg)
      : Error("no-convergence", msg + " after " + std::to_string(iterations) + " iterations"),
        iterations_(iterations) {}
  std::size_t iterations() const noexcept { return iterations_; }

 private:
  std::size_t iterations_;
};

/// A selected top-d eigenvalue was negative: the embedding dimension is
/// larger than the positive part of the spectrum supports.
class NegativeEigenvalueError : public Error {
 public:
  NegativeEigenvalueError(std::vector<double> spectrum, std::size_t index)
      : Error("negative-eigenvalue", describe(spectrum, index)),
        spectrum_(std::move(spectrum)),
        index_(index) {}
  const std::vector<double>& spectrum() const noexcept { return spectrum_; }
  /// Position (0-based) of the first negative eigenvalue within the top d.
  std::size_t index() const noexcept { return index_; }

 private:
  static std::string describe(const std::vector<double>& s, std::size_t index) {
    std::string out = "eigenvalue " + std::to_string(index) + " is negative; top spectrum:";
    for (double v : s) out += " " + std::to_string(v);
    return out;
  }
  std::vector<double> spectrum_;
  std::size_t index_;
};

class NotPsdError : public Error {
 public:
  NotPsdError(double min_eigenvalue)
      : Error("not-psd", "block matrix is not positive semidefinite (min eigenvalue " +
                             std::to_string(min_eigenvalue) + ")"),
        min_eigenvalue_(min_eigenvalue) {}
  double min_eigenvalue() const noexcept { return min_eigenvalue_; }

 private:
  double min_eigenvalue_;
};

class ConnectivityError : public Error {
 public:
  explicit ConnectivityError(std::size_t attempts)
      : Error("connectivity-exhausted",
              "no connected graph after " + std::to_string(attempts) + " attempts"),
        attempts_(attempts) {}
  std::size_t attempts() const noexcept { return attempts_; }

 private:
  std::size_t attempts_;
};

class DisconnectedGraphError : public Error {
 public:
  DisconnectedGraphError() : Error("disconnected", "statistic undefined on a disconnected graph") {}
};

class BudgetError : public Error {
 public:
  BudgetError(double tuples, double budget)
      : Error("budget-exceeded", "exact evaluation needs " + std::to_string(tuples) +
                                     " tuples, budget is " + std::to_string(budget) +
                                     "; use Monte Carlo evaluation") {}
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& msg) : Error("invalid-argument", msg) {}
};

/// Invalid experiment configuration; the message starts with the field path.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& path, const std::string& msg) : Error("config", path + ": " + msg), path_(path) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

/// An experiment lost more trials to computational failures than allowed.
class TrialFailureError : public Error {
 public:
  TrialFailureError(std::size_t failed, std::size_t total)
      : Error("trial-failures", std::to_string(failed) + " of " + std::to_string(total) +
                                    " trials failed (more than 5%)") {}
};

}  // namespace rdpgboot
