#pragma once

#include <stdexcept>
#include <string>

namespace reactodiff {

/// Base class for every error raised by the library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// grid / assembly
struct NonPositiveExtent : Error { using Error::Error; };
struct UnsupportedDimension : Error { using Error::Error; };
struct EllipticityViolation : Error { using Error::Error; };
struct DimensionMismatch : Error { using Error::Error; };
struct InvalidField : Error { using Error::Error; };

// reaction / yosida
struct LeadingCoefficientViolation : Error { using Error::Error; };
struct IndexBelowShift : Error { using Error::Error; };
struct SingularResolvent : Error { using Error::Error; };

// time stepping / solvers
struct NegativeInterval : Error { using Error::Error; };
struct SingularStep : Error { using Error::Error; };
struct NoConvergence : Error { using Error::Error; };
struct ModeDisagreement : Error { using Error::Error; };
struct GridMismatch : Error { using Error::Error; };
struct DegenerateKernel : Error { using Error::Error; };

// stochastic layer
struct AlphaOutOfRange : Error { using Error::Error; };
struct RegularityPreconditionFailed : Error { using Error::Error; };
struct SequenceNotCauchy : Error { using Error::Error; };

// harness
struct ConfigInvalid : Error { using Error::Error; };
struct IoFailure : Error { using Error::Error; };

// internal: raised by factorizations, re-thrown with context by callers
struct SingularMatrix : Error { using Error::Error; };

} // namespace reactodiff
