#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace grs {

enum class ErrorCode {
    Reject,
    SingularState,
    Invalid,
    Domain,
    NonfiniteRhs,
    MaxSteps,
    EmptyTrajectory,
    GammaZero,
    HypothesisViolated,
    OutOfInterval,
    Config,
};

constexpr std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::Reject: return "REJECT";
        case ErrorCode::SingularState: return "SINGULAR_STATE";
        case ErrorCode::Invalid: return "INVALID";
        case ErrorCode::Domain: return "DOMAIN";
        case ErrorCode::NonfiniteRhs: return "NONFINITE_RHS";
        case ErrorCode::MaxSteps: return "MAX_STEPS";
        case ErrorCode::EmptyTrajectory: return "EMPTY_TRAJECTORY";
        case ErrorCode::GammaZero: return "GAMMA_ZERO";
        case ErrorCode::HypothesisViolated: return "HYPOTHESIS_VIOLATED";
        case ErrorCode::OutOfInterval: return "OUT_OF_INTERVAL";
        case ErrorCode::Config: return "CONFIG";
    }
    return "UNKNOWN";
}

/// Every failure raised by the library. `field()` names the offending input
/// when there is one (parameter name, config path, state component).
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message, std::string field = {})
        : std::runtime_error(std::string(to_string(code)) + ": " + message),
          code_(code),
          field_(std::move(field)) {}

    ErrorCode code() const noexcept { return code_; }
    const std::string& field() const noexcept { return field_; }

private:
    ErrorCode code_;
    std::string field_;
};

}  // namespace grs
