#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace sitekit {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Anything caused by bad input data. The CLI maps these to exit code 2.
class InputError : public Error {
 public:
  using Error::Error;
};

class ParseError : public InputError {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : InputError(what + " at offset " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

class StructuralError : public InputError {
 public:
  using InputError::InputError;
};

// A tree uses a rule the grammar does not contain.
class OutOfGrammarError : public InputError {
 public:
  OutOfGrammarError(const std::string& what, std::vector<std::string> rules)
      : InputError(what), rules_(std::move(rules)) {}
  const std::vector<std::string>& rules() const noexcept { return rules_; }

 private:
  std::vector<std::string> rules_;
};

// Linear algebra and sampling failures. The CLI maps these to exit code 3.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class DivergenceError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace sitekit
