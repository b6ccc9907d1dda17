#pragma once

#include <stdexcept>
#include <string>

namespace cfkg {

enum class ErrorKind {
    Parse,
    Schema,
    DanglingEndpoint,
    UnknownId,
    EmptyPath,
    LengthMismatch,
    EmptyCorpus,
    DivisionGuard,
    Divergence,
    InfeasibleBudget,
    MissingScore,
    DimensionMismatch,
    Io,
};

const char* to_string(ErrorKind kind);

// Every recoverable failure in the library surfaces as this type; the CLI
// maps the kind onto its exit-code contract.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

} // namespace cfkg
