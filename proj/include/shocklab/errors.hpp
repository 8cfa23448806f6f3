#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace shocklab {

// Every failure raised by the library derives from Error, so callers can map
// the category to an exit status without parsing messages.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Inputs outside the operation's domain (non-finite states, bad grids, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Caller broke a documented precondition (e.g. backward time without Pi_u).
class ContractError : public Error {
 public:
  using Error::Error;
};

class UnsupportedError : public Error {
 public:
  using Error::Error;
};

class SingularSystemError : public Error {
 public:
  using Error::Error;
};

class NoConnectionError : public Error {
 public:
  NoConnectionError(const std::string& what, std::vector<double> history)
      : Error(what), residual_history(std::move(history)) {}
  std::vector<double> residual_history;
};

class AmbiguousSplittingError : public Error {
 public:
  using Error::Error;
};

class ContourError : public Error {
 public:
  using Error::Error;
};

class NonContractionError : public Error {
 public:
  NonContractionError(const std::string& what, double f) : Error(what), factor(f) {}
  double factor;
};

class FrameBreakdownError : public Error {
 public:
  using Error::Error;
};

class PhaseAmbiguityError : public Error {
 public:
  using Error::Error;
};

class QuadratureError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// ODE integration blew up or needed more substeps than allowed.
class StepSizeError : public Error {
 public:
  using Error::Error;
};

}  // namespace shocklab
