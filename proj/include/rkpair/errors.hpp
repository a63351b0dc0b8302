#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rkpair {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside its documented range.
class RangeError : public Error {
 public:
  using Error::Error;
};

class LookupError : public Error {
 public:
  using Error::Error;
};

// Malformed dimensions or shape of a tableau.
class StructuralError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, std::string field, const std::string& what)
      : Error("line " + std::to_string(line) + " (" + field + "): " + what),
        line_(line),
        field_(std::move(field)) {}
  std::size_t line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  std::size_t line_;
  std::string field_;
};

// A denominator or nondegeneracy factor of a construction vanished.
class DegenerateError : public Error {
 public:
  explicit DegenerateError(std::string factor)
      : Error("degenerate parameters: " + factor + " = 0"),
        factor_(std::move(factor)) {}
  const std::string& factor() const { return factor_; }

 private:
  std::string factor_;
};

// The weight-difference system has only the zero solution.
class InconsistentError : public Error {
 public:
  using Error::Error;
};

class NoSolutionError : public Error {
 public:
  using Error::Error;
};

class CapabilityError : public Error {
 public:
  using Error::Error;
};

// Step-size underflow, non-finite values or reference disagreement.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace rkpair
