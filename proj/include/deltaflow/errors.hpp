#pragma once

#include <stdexcept>
#include <string>

namespace deltaflow {

// Every library failure derives from Error so callers can catch one type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad input values: even primes, non-units where a unit is required, ...
class DomainError : public Error {
 public:
  using Error::Error;
};

class PrecisionError : public Error {
 public:
  using Error::Error;
};

class VariableMismatch : public Error {
 public:
  using Error::Error;
};

// A point or element left the open set on which a chart is defined.
class ChartViolation : public Error {
 public:
  using Error::Error;
};

// A construction needed to invert something that is not a unit of the chart.
class ChartObstruction : public Error {
 public:
  using Error::Error;
};

class InadmissibleFiber : public Error {
 public:
  using Error::Error;
};

class GaugeUnsolvable : public Error {
 public:
  GaugeUnsolvable(const std::string& what, std::string witness)
      : Error(what), witness_(std::move(witness)) {}
  const std::string& witness() const noexcept { return witness_; }

 private:
  std::string witness_;
};

// Linear algebra and spectral failures on GL_n charts.
class SpectrumError : public Error {
 public:
  using Error::Error;
};

// Broken internal invariant; always an implementation bug, never bad data.
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

#define DELTAFLOW_ASSERT(cond, msg)                                            \
  do {                                                                         \
    if (!(cond)) {                                                             \
      throw ::deltaflow::InternalError(std::string(__FILE__) + ":" +           \
                                       std::to_string(__LINE__) + ": " + msg); \
    }                                                                          \
  } while (0)

}  // namespace deltaflow
