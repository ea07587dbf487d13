#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mixlogit {

enum class ErrorCode {
    // dataset
    MissingColumn,
    DanglingRespondent,
    NonContiguousTask,
    ChosenUnavailable,
    AvailabilityMismatch,
    InvalidValue,
    UnknownBand,
    // modelspec
    SyntaxError,
    UnknownAttribute,
    DuplicateBinding,
    BlockMemberNotRandom,
    DimensionMismatch,
    // qmc
    DimUnsupported,
    // simlik / designsim
    BindingMismatch,
    NonPositiveStatusQuo,
    TooManyAttributesForArray,
    // mslestim
    NonFiniteEntry,
    NotNegativeDefinite,
    CovNotPSD,
    // postfit
    NegativeStatistic,
    MissingCoefficient,
    NonPositiveIncome,
    // cli
    DataHashMismatch,
    IoError,
};

constexpr std::string_view to_string(ErrorCode code)
{
    switch (code) {
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::DanglingRespondent: return "DanglingRespondent";
    case ErrorCode::NonContiguousTask: return "NonContiguousTask";
    case ErrorCode::ChosenUnavailable: return "ChosenUnavailable";
    case ErrorCode::AvailabilityMismatch: return "AvailabilityMismatch";
    case ErrorCode::InvalidValue: return "InvalidValue";
    case ErrorCode::UnknownBand: return "UnknownBand";
    case ErrorCode::SyntaxError: return "SyntaxError";
    case ErrorCode::UnknownAttribute: return "UnknownAttribute";
    case ErrorCode::DuplicateBinding: return "DuplicateBinding";
    case ErrorCode::BlockMemberNotRandom: return "BlockMemberNotRandom";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::DimUnsupported: return "DimUnsupported";
    case ErrorCode::BindingMismatch: return "BindingMismatch";
    case ErrorCode::NonPositiveStatusQuo: return "NonPositiveStatusQuo";
    case ErrorCode::TooManyAttributesForArray: return "TooManyAttributesForArray";
    case ErrorCode::NonFiniteEntry: return "NonFiniteEntry";
    case ErrorCode::NotNegativeDefinite: return "NotNegativeDefinite";
    case ErrorCode::CovNotPSD: return "CovNotPSD";
    case ErrorCode::NegativeStatistic: return "NegativeStatistic";
    case ErrorCode::MissingCoefficient: return "MissingCoefficient";
    case ErrorCode::NonPositiveIncome: return "NonPositiveIncome";
    case ErrorCode::DataHashMismatch: return "DataHashMismatch";
    case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what)
        , code_(code)
    {
    }

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace mixlogit
