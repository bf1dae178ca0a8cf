#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pfa {

enum class ErrorCode {
    NotSymmetric,
    NotPSD,
    IndexOutOfRange,
    DomainError,
    RankDeficient,
    ZeroEigenvalue,
    EmptySet,
    NotConverged,
    ConstantColumn,
    DimensionMismatch,
    Parse,
    Io,
    InvalidConfig,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above so
/// that front ends can map it to an exit status.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// True for failures caused by malformed or inconsistent user input (as
/// opposed to numerical breakdown).
bool is_input_error(ErrorCode code) noexcept;

}  // namespace pfa
