#ifndef SIEVESTREAM_ERRORS_HPP
#define SIEVESTREAM_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace sievestream {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad configuration (unknown algorithm name, invalid parameter range, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A record file that cannot be parsed; carries the 1-based line number.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, long line)
      : Error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
  long line() const { return line_; }

 private:
  long line_;
};

// A sample is missing a field the current objective requires, or two
// samples disagree on vector dimensions.
class InputError : public Error {
 public:
  using Error::Error;
};

// A sample carries a field with an out-of-domain value (negative score,
// softmax that does not sum to one, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Non-finite arithmetic or a determinant the oracle path cannot represent.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Brute-force enumeration would exceed its subset budget.
class BudgetError : public Error {
 public:
  using Error::Error;
};

// A cached marginal-gain result was applied to a state that has changed
// since the gain was computed.
class StaleGainError : public Error {
 public:
  using Error::Error;
};

}  // namespace sievestream

#endif  // SIEVESTREAM_ERRORS_HPP
