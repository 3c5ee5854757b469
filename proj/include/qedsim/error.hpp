#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace qedsim {

enum class ErrorKind {
    EmptyState,
    LengthMismatch,
    NonFinite,
    NotUnitary,
    NotIsometry,
    BadDimension,
    BisectionFailure,
    BudgetExceeded,
    CreationCollision,
    CreationOnVacuum,
    StrictOmega,
    StaticValidation,
    DimensionGuard,
    SyntaxError,
    ValidationError,
    UnknownGate,
    Io,
};

inline std::string_view to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::EmptyState: return "EmptyState";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::NotUnitary: return "NotUnitary";
    case ErrorKind::NotIsometry: return "NotIsometry";
    case ErrorKind::BadDimension: return "BadDimension";
    case ErrorKind::BisectionFailure: return "BisectionFailure";
    case ErrorKind::BudgetExceeded: return "BudgetExceeded";
    case ErrorKind::CreationCollision: return "CreationCollision";
    case ErrorKind::CreationOnVacuum: return "CreationOnVacuum";
    case ErrorKind::StrictOmega: return "StrictOmega";
    case ErrorKind::StaticValidation: return "StaticValidation";
    case ErrorKind::DimensionGuard: return "DimensionGuard";
    case ErrorKind::SyntaxError: return "SyntaxError";
    case ErrorKind::ValidationError: return "ValidationError";
    case ErrorKind::UnknownGate: return "UnknownGate";
    case ErrorKind::Io: return "Io";
    }
    return "Unknown";
}

/// Faults raised while a circuit is executing, as opposed to problems
/// detectable before the run starts.
inline bool is_runtime_fault(ErrorKind kind) {
    return kind == ErrorKind::CreationCollision || kind == ErrorKind::CreationOnVacuum ||
           kind == ErrorKind::StrictOmega || kind == ErrorKind::BisectionFailure ||
           kind == ErrorKind::NonFinite;
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

/// Parser diagnostic. Line and column are 1-based; columns count code points.
class ParseError : public Error {
public:
    ParseError(ErrorKind kind, std::size_t line, std::size_t column, const std::string& message)
        : Error(kind, std::to_string(line) + ":" + std::to_string(column) + ": " + message),
          line_(line), column_(column), detail_(message) {}

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }
    const std::string& detail() const noexcept { return detail_; }

private:
    std::size_t line_;
    std::size_t column_;
    std::string detail_;
};

} // namespace qedsim
