#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace porous {

/// Bad caller input: dimension mismatch, out-of-range parameter, ...
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Base for failures that are reported (and mapped to exit codes) rather than bugs.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A sampled certificate could not be established within its sample budget.
class NeedsMoreSamples : public Error {
 public:
  using Error::Error;
};

/// The hole-family build could not finish; `diagnostics` describes where it stopped.
class ConstructionFailure : public Error {
 public:
  ConstructionFailure(const std::string& what, std::string diagnostics)
      : Error(what), diagnostics_(std::move(diagnostics)) {}
  const std::string& diagnostics() const noexcept { return diagnostics_; }

 private:
  std::string diagnostics_;
};

/// A hypothesis of an audited inequality does not hold for the given input.
class PreconditionError : public Error {
 public:
  PreconditionError(std::string hypothesis, const std::string& what)
      : Error(what), hypothesis_(std::move(hypothesis)) {}
  const std::string& hypothesis() const noexcept { return hypothesis_; }

 private:
  std::string hypothesis_;
};

/// Damped Newton did not converge while inverting the first n surface coordinates.
class ExtractionError : public Error {
 public:
  using Error::Error;
};

/// Malformed family / report / config stream. `line` is 1-based, 0 when unknown.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace porous
