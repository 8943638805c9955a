#pragma once

#include <stdexcept>
#include <string>

namespace fairmw {

enum class ErrorKind {
    InvalidArgument,
    InvalidExpertCount,
    InvalidHorizon,
    FormatError,
    IoError,
    StreamExhausted,
    DegenerateData,
    NoObservations,
    NonFiniteInput,
    DomainError,
    UndefinedGap,
    EmptyTrajectory,
    EngineMismatch,
    SchemaError,
    EmptyDataset,
    ConfigError,
};

const char* to_string(ErrorKind kind) noexcept;

/// Every failure raised by the library carries one of the kinds above so
/// callers (the CLI in particular) can map it to an exit status.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message);

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace fairmw
