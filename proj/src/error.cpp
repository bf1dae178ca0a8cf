#include "pfa/error.hpp"

namespace pfa {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::NotSymmetric: return "NotSymmetric";
        case ErrorCode::NotPSD: return "NotPSD";
        case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
        case ErrorCode::DomainError: return "DomainError";
        case ErrorCode::RankDeficient: return "RankDeficient";
        case ErrorCode::ZeroEigenvalue: return "ZeroEigenvalue";
        case ErrorCode::EmptySet: return "EmptySet";
        case ErrorCode::NotConverged: return "NotConverged";
        case ErrorCode::ConstantColumn: return "ConstantColumn";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::Parse: return "Parse";
        case ErrorCode::Io: return "Io";
        case ErrorCode::InvalidConfig: return "InvalidConfig";
    }
    return "Unknown";
}

bool is_input_error(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::RankDeficient:
        case ErrorCode::NotConverged:
        case ErrorCode::ZeroEigenvalue:
            return false;
        default:
            return true;
    }
}

}  // namespace pfa
