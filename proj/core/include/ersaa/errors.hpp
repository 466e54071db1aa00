#pragma once

#include <stdexcept>

namespace ersaa {

/// Base class for every error thrown by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Least-squares design matrix is numerically rank deficient.
struct RankDeficientError : Error { using Error::Error; };

/// A pivot or factorization step lost too much precision to continue.
struct NumericalBreakdownError : Error { using Error::Error; };

/// A model or problem description violates its construction rules.
struct InvalidSpecError : Error { using Error::Error; };

/// An input lies outside the mathematical domain of the requested map.
struct DomainError : Error { using Error::Error; };

/// An operation needs ground-truth fields that this dataset does not carry.
struct TruthUnavailableError : Error { using Error::Error; };

/// All residuals in some component are too small to fit a scale model.
struct DegenerateResidualsError : Error { using Error::Error; };

/// The scenario approximation of the decision problem is infeasible.
struct SaaInfeasibleError : Error { using Error::Error; };

/// The scenario approximation of the decision problem is unbounded below.
struct SaaUnboundedError : Error { using Error::Error; };

/// A second-stage program has no feasible recourse for some scenario.
struct RecourseInfeasibleError : Error { using Error::Error; };

/// Too few samples, replications, or grid points for the requested statistic.
struct InsufficientDataError : Error { using Error::Error; };

/// A certified inequality was violated beyond numerical slack.
struct BoundViolationError : Error { using Error::Error; };

/// A configuration document is malformed or self-inconsistent.
struct ConfigError : Error { using Error::Error; };

/// A data file is malformed or inconsistent with the configuration.
struct DataError : Error { using Error::Error; };

} // namespace ersaa
