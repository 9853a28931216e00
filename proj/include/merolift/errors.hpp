// Structured error types shared by all merolift modules.
//
// Numerical routines in this library never return "large garbage" near
// singular configurations: they throw one of the typed errors below so that
// drivers (quadrature, CLI) can react deterministically.
#pragma once

#include <stdexcept>
#include <string>

namespace merolift {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Invalid argument / configuration (domain violations, congruence failures,
/// mismatched run parameters).
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

/// Evaluation requested within the guard distance of a pole / CM point.
class SingularPoint : public Error {
public:
    explicit SingularPoint(const std::string& msg) : Error(msg) {}
};

/// A series or iteration failed to reach its tolerance contract.
class NonConvergent : public Error {
public:
    explicit NonConvergent(const std::string& msg) : Error(msg) {}
};

/// Two-radius contour cross-check failed (undersampled Fourier extraction).
class AliasingDetected : public Error {
public:
    explicit AliasingDetected(const std::string& msg) : Error(msg) {}
};

/// The argument of the B_m kernel left its half-plane of analyticity.
class DomainViolation : public Error {
public:
    explicit DomainViolation(const std::string& msg) : Error(msg) {}
};

/// Regularization runs at nested epsilons disagree beyond the error budget,
/// or the requested epsilon produces overlapping / invalid guard discs.
class EpsilonInconsistent : public Error {
public:
    explicit EpsilonInconsistent(const std::string& msg) : Error(msg) {}
};

} // namespace merolift
