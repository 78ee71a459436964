#ifndef HTSGD_ERRORS_HPP
#define HTSGD_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace htsgd {

// Base for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Malformed or out-of-schema configuration (maps to CLI exit code 1).
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(what) {}
};

// Parameter outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error(what) {}
};

// Operation invoked on the wrong nonlinearity class (component-wise vs joint).
class ClassificationError : public Error {
 public:
  explicit ClassificationError(const std::string& what) : Error(what) {}
};

// No closed-form density available (symmetric alpha-stable).
class UnsupportedDensityError : public Error {
 public:
  explicit UnsupportedDensityError(const std::string& what) : Error(what) {}
};

// Monte-Carlo estimate too noisy to be usable.
class EstimationError : public Error {
 public:
  explicit EstimationError(const std::string& what) : Error(what) {}
};

// Not enough usable data points (e.g. slope fit windows).
class InsufficientDataError : public Error {
 public:
  explicit InsufficientDataError(const std::string& what) : Error(what) {}
};

}  // namespace htsgd

#endif  // HTSGD_ERRORS_HPP
