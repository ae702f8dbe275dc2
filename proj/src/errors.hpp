#pragma once

#include <stdexcept>
#include <string>

namespace ahy {

enum class ErrorCode {
    InvalidArgument = 1,
    Dimension,
    ParameterRange,
    MetricDegeneracy,
    CriticalExponent,
    Positivity,
    SingularSystem,
    InsufficientData,
    FitQuality,
    Obstruction,
    Precondition,
    MaximumPrinciple,
    Monotonicity,
    MaxIterations,
    DomainExhaustion,
    Config,
    Io,
    Internal,
};

const char* errorCodeName(ErrorCode code) noexcept;

/**
 * Library error. Carries a machine-readable code plus the module and pipeline
 * stage where it was raised, so callers can surface "module/stage: message".
 */
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, std::string module, std::string message, std::string stage = {});

    ErrorCode code() const noexcept { return code_; }
    const std::string& module() const noexcept { return module_; }
    const std::string& stage() const noexcept { return stage_; }
    const std::string& detail() const noexcept { return detail_; }

    /// Same error relabelled with an outer pipeline stage.
    Error withStage(const std::string& stage) const;

private:
    ErrorCode code_;
    std::string module_;
    std::string stage_;
    std::string detail_;
};

[[noreturn]] void raise(ErrorCode code, const char* module, const std::string& message);

}  // namespace ahy
