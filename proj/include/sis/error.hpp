#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sis {

enum class ErrorKind {
    NegativeEntry,
    NotIrreducible,
    NotMetzler,
    NonpositiveRate,
    NonpositiveWeight,
    InvalidShape,
    OutOfDomain,
    NoConvergence,
    PreconditionViolated,
    MonotonicityViolation,
    NotEquilibrium,
    DomainEscape,
    ParseError,
    IoFailure,
};

inline std::string_view to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::NegativeEntry: return "NegativeEntry";
    case ErrorKind::NotIrreducible: return "NotIrreducible";
    case ErrorKind::NotMetzler: return "NotMetzler";
    case ErrorKind::NonpositiveRate: return "NonpositiveRate";
    case ErrorKind::NonpositiveWeight: return "NonpositiveWeight";
    case ErrorKind::InvalidShape: return "InvalidShape";
    case ErrorKind::OutOfDomain: return "OutOfDomain";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::PreconditionViolated: return "PreconditionViolated";
    case ErrorKind::MonotonicityViolation: return "MonotonicityViolation";
    case ErrorKind::NotEquilibrium: return "NotEquilibrium";
    case ErrorKind::DomainEscape: return "DomainEscape";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::IoFailure: return "IoFailure";
    }
    return "Unknown";
}

/// Every failure raised by the library. `kind()` is stable and meant for
/// dispatch (the CLI maps kinds to exit codes); `what()` names the offending
/// field or index where there is one.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& detail)
        : std::runtime_error(std::string(to_string(kind)) + ": " + detail), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

} // namespace sis
