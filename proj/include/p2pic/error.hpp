#pragma once

#include <stdexcept>
#include <string>

namespace p2pic {

enum class ErrorKind {
    RoundBoundExceeded,
    Deadlock,
    SupportTooLarge,
    DomainMismatch,
    MissingColumns,
    InvalidArgument,
    InvalidProtocol,
    PublicCoinsPresent,
    PrivateCoinsPresent,
    NotProperSynchronous,
    EpsilonTooLarge,
    SameFunctionValue,
    ArityTooSmall,
    IncompatibleArity,
    PromiseViolation,
    NotPrivate,
    ZeroProbabilityCondition,
    ConfigError,
};

inline const char* to_string(ErrorKind k) {
    switch (k) {
    case ErrorKind::RoundBoundExceeded: return "RoundBoundExceeded";
    case ErrorKind::Deadlock: return "Deadlock";
    case ErrorKind::SupportTooLarge: return "SupportTooLarge";
    case ErrorKind::DomainMismatch: return "DomainMismatch";
    case ErrorKind::MissingColumns: return "MissingColumns";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::InvalidProtocol: return "InvalidProtocol";
    case ErrorKind::PublicCoinsPresent: return "PublicCoinsPresent";
    case ErrorKind::PrivateCoinsPresent: return "PrivateCoinsPresent";
    case ErrorKind::NotProperSynchronous: return "NotProperSynchronous";
    case ErrorKind::EpsilonTooLarge: return "EpsilonTooLarge";
    case ErrorKind::SameFunctionValue: return "SameFunctionValue";
    case ErrorKind::ArityTooSmall: return "ArityTooSmall";
    case ErrorKind::IncompatibleArity: return "IncompatibleArity";
    case ErrorKind::PromiseViolation: return "PromiseViolation";
    case ErrorKind::NotPrivate: return "NotPrivate";
    case ErrorKind::ZeroProbabilityCondition: return "ZeroProbabilityCondition";
    case ErrorKind::ConfigError: return "ConfigError";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

} // namespace p2pic
