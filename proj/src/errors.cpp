#include "errors.hpp"

namespace ahy {

namespace {

std::string compose(const std::string& module, const std::string& stage, const std::string& detail) {
    std::string label = module;
    if (!stage.empty()) label += "/" + stage;
    return label.empty() ? detail : label + ": " + detail;
}

}  // namespace

const char* errorCodeName(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidArgument: return "invalid-argument";
        case ErrorCode::Dimension: return "dimension";
        case ErrorCode::ParameterRange: return "parameter-range";
        case ErrorCode::MetricDegeneracy: return "metric-degeneracy";
        case ErrorCode::CriticalExponent: return "critical-exponent-undefined";
        case ErrorCode::Positivity: return "positivity";
        case ErrorCode::SingularSystem: return "singular-system";
        case ErrorCode::InsufficientData: return "insufficient-data";
        case ErrorCode::FitQuality: return "fit-quality";
        case ErrorCode::Obstruction: return "obstruction";
        case ErrorCode::Precondition: return "precondition";
        case ErrorCode::MaximumPrinciple: return "maximum-principle-violation";
        case ErrorCode::Monotonicity: return "monotonicity-fault";
        case ErrorCode::MaxIterations: return "max-iterations";
        case ErrorCode::DomainExhaustion: return "domain-exhaustion";
        case ErrorCode::Config: return "config";
        case ErrorCode::Io: return "io";
        case ErrorCode::Internal: return "internal";
    }
    return "unknown";
}

Error::Error(ErrorCode code, std::string module, std::string message, std::string stage)
    : std::runtime_error(compose(module, stage, message)),
      code_(code),
      module_(std::move(module)),
      stage_(std::move(stage)),
      detail_(std::move(message)) {}

Error Error::withStage(const std::string& stage) const {
    std::string combined = stage_.empty() ? stage : stage + "/" + stage_;
    return Error(code_, module_, detail_, combined);
}

void raise(ErrorCode code, const char* module, const std::string& message) {
    throw Error(code, module, message);
}

}  // namespace ahy
