#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace nujd {

enum class ErrorKind {
    InvalidArgument,
    DimensionMismatch,
    NotSymmetric,
    NonFinite,
    SingularMatrix,
    SingularPseudoCovariance,
    SingularSecondMatrix,
    OrthogonalizationFailure,
    Defective,
    DegenerateSpectrum,
    NotPositiveDefinite,
    NotCollinear,
    NotJointlyDiagonalizable,
    InvalidPrecondition,
    InternalConsistency,
    Parse,
};

constexpr std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::NotSymmetric: return "NotSymmetric";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::SingularMatrix: return "SingularMatrix";
    case ErrorKind::SingularPseudoCovariance: return "SingularPseudoCovariance";
    case ErrorKind::SingularSecondMatrix: return "SingularSecondMatrix";
    case ErrorKind::OrthogonalizationFailure: return "OrthogonalizationFailure";
    case ErrorKind::Defective: return "Defective";
    case ErrorKind::DegenerateSpectrum: return "DegenerateSpectrum";
    case ErrorKind::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorKind::NotCollinear: return "NotCollinear";
    case ErrorKind::NotJointlyDiagonalizable: return "NotJointlyDiagonalizable";
    case ErrorKind::InvalidPrecondition: return "InvalidPrecondition";
    case ErrorKind::InternalConsistency: return "InternalConsistency";
    case ErrorKind::Parse: return "ParseError";
    }
    return "Unknown";
}

/// Single exception type for the library; `kind()` tells callers (and the CLI
/// exit-code mapping) what went wrong.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }
    std::string_view name() const noexcept { return to_string(kind_); }

    /// True for failures of the numerical routines (as opposed to bad input).
    bool is_numeric() const noexcept {
        switch (kind_) {
        case ErrorKind::SingularMatrix:
        case ErrorKind::SingularPseudoCovariance:
        case ErrorKind::SingularSecondMatrix:
        case ErrorKind::OrthogonalizationFailure:
        case ErrorKind::Defective:
        case ErrorKind::DegenerateSpectrum:
        case ErrorKind::NotPositiveDefinite:
        case ErrorKind::NotJointlyDiagonalizable:
        case ErrorKind::InternalConsistency:
            return true;
        default:
            return false;
        }
    }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool cond, ErrorKind kind, const std::string& what) {
    if (!cond) fail(kind, what);
}

} // namespace nujd
