#include "fairmw/error.hpp"

namespace fairmw {

const char* to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::InvalidArgument: return "InvalidArgument";
        case ErrorKind::InvalidExpertCount: return "InvalidExpertCount";
        case ErrorKind::InvalidHorizon: return "InvalidHorizon";
        case ErrorKind::FormatError: return "FormatError";
        case ErrorKind::IoError: return "IoError";
        case ErrorKind::StreamExhausted: return "StreamExhausted";
        case ErrorKind::DegenerateData: return "DegenerateData";
        case ErrorKind::NoObservations: return "NoObservations";
        case ErrorKind::NonFiniteInput: return "NonFiniteInput";
        case ErrorKind::DomainError: return "DomainError";
        case ErrorKind::UndefinedGap: return "UndefinedGap";
        case ErrorKind::EmptyTrajectory: return "EmptyTrajectory";
        case ErrorKind::EngineMismatch: return "EngineMismatch";
        case ErrorKind::SchemaError: return "SchemaError";
        case ErrorKind::EmptyDataset: return "EmptyDataset";
        case ErrorKind::ConfigError: return "ConfigError";
    }
    return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

}  // namespace fairmw
