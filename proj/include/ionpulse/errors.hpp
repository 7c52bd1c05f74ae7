#pragma once

#include <stdexcept>
#include <string>

namespace ionpulse {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Bad dimensions, out-of-range indices, invalid parameter values.
struct InvalidArgument : Error {
  using Error::Error;
};

/// Non-finite value reached the canonical serializer; never hash silently.
struct CanonicalizationError : Error {
  using Error::Error;
};

/// Numerical failure (non-finite entries, solver breakdown).
struct NumericError : Error {
  using Error::Error;
};

/// Library lookup found no entry under the requested strategy.
struct LookupMiss : Error {
  using Error::Error;
};

/// Optimizer finished below the caching floor; carries the best fidelity seen.
struct SynthesisError : Error {
  SynthesisError(const std::string& what, double best)
      : Error(what), best_fidelity(best) {}
  double best_fidelity;
};

struct IoError : Error {
  using Error::Error;
};

/// Stored pulse fails its integrity or key checks.
struct CorruptEntry : Error {
  using Error::Error;
};

/// Duplicate plugin registration.
struct ConflictError : Error {
  using Error::Error;
};

/// Schedule export cannot proceed (e.g. missing qubit frequency).
struct ExportError : Error {
  using Error::Error;
};

}  // namespace ionpulse
