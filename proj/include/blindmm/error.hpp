#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace blindmm {

enum class ErrorCode {
    NonSymmetric,
    NonFinite,
    SingularPower,
    DimensionMismatch,
    NotPositiveDefinite,
    RankDeficient,
    NoConvergence,
    ZeroDirection,
    DegenerateG,
    InvalidArgument,
    Parse,
    Config,
    Io,
};

std::string_view to_string(ErrorCode code);

/// Library error carrying a machine-readable code. The CLI maps codes to exit statuses.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace blindmm
