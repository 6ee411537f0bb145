#pragma once

#include <stdexcept>
#include <string>

namespace scfred {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct InvalidWeightsError : Error {
    using Error::Error;
};
struct InvalidDomainError : Error {
    using Error::Error;
};
struct LevelOutOfRangeError : Error {
    using Error::Error;
};
struct InvalidPairError : Error {
    using Error::Error;
};
struct DomainError : Error {
    using Error::Error;
};
struct InterfaceMismatchError : Error {
    using Error::Error;
};
struct ParameterOutOfRangeError : Error {
    using Error::Error;
};
struct EvaluationError : Error {
    using Error::Error;
};
struct NotAContractionError : Error {
    using Error::Error;
};

/// Carries the last residual seen when an iteration gave up.
class ConvergenceFailureError : public Error {
public:
    ConvergenceFailureError(const std::string& msg, double residual)
        : Error(msg + " (residual " + std::to_string(residual) + ")"), residual_(residual) {}
    double residual() const { return residual_; }

private:
    double residual_;
};

struct DegenerateCriticalPointError : Error {
    using Error::Error;
};
struct TotalOrderViolationError : Error {
    using Error::Error;
};
struct NoTrajectoryFoundError : Error {
    using Error::Error;
};
struct PreconditionError : Error {
    using Error::Error;
};
struct CorrectionFailureError : Error {
    using Error::Error;
};
struct GradingError : Error {
    using Error::Error;
};

/// Raised when a counting function fails Q*Q = 0; carries the witness label.
class NotADifferentialError : public Error {
public:
    NotADifferentialError(const std::string& msg, std::string witness)
        : Error(msg + " (witness " + witness + ")"), witness_(std::move(witness)) {}
    const std::string& witness() const { return witness_; }

private:
    std::string witness_;
};

struct MustVerifyFirstError : Error {
    using Error::Error;
};
struct TableError : Error {
    using Error::Error;
};
struct StructureMismatchError : Error {
    using Error::Error;
};

/// Configuration file problems, with line/key diagnostics.
class ConfigError : public Error {
public:
    ConfigError(const std::string& msg, int line, const std::string& key = "")
        : Error(msg + " at line " + std::to_string(line) + (key.empty() ? "" : " (key '" + key + "')")),
          line_(line),
          key_(key) {}
    int line() const { return line_; }
    const std::string& key() const { return key_; }

private:
    int line_;
    std::string key_;
};

}  // namespace scfred
