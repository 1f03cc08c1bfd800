#pragma once

#include <stdexcept>
#include <string>

namespace bethe3 {

/// Root of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A denominator vanished. `factor()` names the offending factor, e.g. "g(x,y)".
class PoleError : public Error {
 public:
  PoleError(std::string factor, const std::string& detail)
      : Error("pole in " + factor + (detail.empty() ? "" : ": " + detail)),
        factor_(std::move(factor)) {}
  const std::string& factor() const noexcept { return factor_; }

 private:
  std::string factor_;
};

class CardinalityError : public Error {
 public:
  using Error::Error;
};
class DimensionError : public Error {
 public:
  using Error::Error;
};
class DegenerateLabelError : public Error {
 public:
  using Error::Error;
};
class ModelError : public Error {
 public:
  using Error::Error;
};
class SingularTransferError : public Error {
 public:
  using Error::Error;
};
class OverlapError : public Error {
 public:
  using Error::Error;
};
class StrategyError : public Error {
 public:
  using Error::Error;
};
class InterpolationError : public Error {
 public:
  using Error::Error;
};
class NotOnShellError : public Error {
 public:
  using Error::Error;
};
class NotApplicableError : public Error {
 public:
  using Error::Error;
};
class NoConvergence : public Error {
 public:
  using Error::Error;
};
class DegenerateRoots : public Error {
 public:
  using Error::Error;
};
class BranchError : public Error {
 public:
  using Error::Error;
};
class OmegaAllZero : public Error {
 public:
  using Error::Error;
};
class ContinuationFailure : public Error {
 public:
  using Error::Error;
};
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace bethe3
