#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hcb {

enum class ErrorKind {
    invalid_argument,
    dimension_mismatch,
    unsupported_loss,
    numerical_instability,
    infeasible,
    inconsistency,
    io,
};

inline std::string_view to_string(ErrorKind kind)
{
    switch (kind) {
    case ErrorKind::invalid_argument: return "invalid_argument";
    case ErrorKind::dimension_mismatch: return "dimension_mismatch";
    case ErrorKind::unsupported_loss: return "unsupported_loss";
    case ErrorKind::numerical_instability: return "numerical_instability";
    case ErrorKind::infeasible: return "infeasible";
    case ErrorKind::inconsistency: return "inconsistency";
    case ErrorKind::io: return "io";
    }
    return "unknown";
}

/// Domain error raised by every module; the CLI maps it to exit code 1.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

inline void require(bool condition, ErrorKind kind, const std::string& message)
{
    if (!condition)
        throw Error(kind, message);
}

} // namespace hcb
