#pragma once

#include <stdexcept>
#include <string>

namespace tempered {

/// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Linear model
struct SingularDesign : Error { using Error::Error; };
struct NonPositiveAlpha : Error { using Error::Error; };
struct DegenerateDOF : Error { using Error::Error; };
struct IndexOutOfRange : Error { using Error::Error; };

// Tuning
struct DegenerateFold : Error { using Error::Error; };
struct DegenerateLeverage : Error { using Error::Error; };
struct EmptyFold : Error { using Error::Error; };
struct AlphaOutOfRange : Error { using Error::Error; };

// Conjugate families
struct SupportViolation : Error { using Error::Error; };
struct ParameterOutOfSpace : Error { using Error::Error; };

// MCMC
struct Separation : Error { using Error::Error; };
struct NoConvergence : Error { using Error::Error; };

// Metrics
struct UnsupportedPair : Error { using Error::Error; };
struct MomentUndefined : Error { using Error::Error; };

// Experiments / IO
struct InsufficientData : Error { using Error::Error; };
struct ParseError : Error { using Error::Error; };
struct SizeTooLarge : Error { using Error::Error; };
struct SchemaMismatch : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };

}  // namespace tempered
