#pragma once

#include <stdexcept>
#include <string>

namespace qsd {

// Malformed or invalid user input (files, parameters). CLI exit code 2.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A schema violation while reading a document; carries the offending field path.
class SchemaError : public InputError {
 public:
  SchemaError(std::string path, const std::string& what)
      : InputError(path + ": " + what), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

// Numerical failure inside a computation (eigensolver, consistency checks). CLI exit code 1.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A documented precondition of an operation was violated by the caller.
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace qsd
