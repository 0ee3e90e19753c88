#include "sgf/error.hpp"

namespace sgf {

std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::Syntax: return "Syntax";
    case ErrorCode::ArityMismatch: return "ArityMismatch";
    case ErrorCode::DuplicateOutputName: return "DuplicateOutputName";
    case ErrorCode::UnknownRelation: return "UnknownRelation";
    case ErrorCode::NotConforming: return "NotConforming";
    case ErrorCode::VariableAbsent: return "VariableAbsent";
    case ErrorCode::MissingUpstreamOutput: return "MissingUpstreamOutput";
    case ErrorCode::ReduceError: return "ReduceError";
    case ErrorCode::MalformedMessage: return "MalformedMessage";
    case ErrorCode::OverlappingFormulaVariables: return "OverlappingFormulaVariables";
    case ErrorCode::NotEligible: return "NotEligible";
    case ErrorCode::MissingStats: return "MissingStats";
    case ErrorCode::NoCondition: return "NoCondition";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::StrategyInapplicable: return "StrategyInapplicable";
    case ErrorCode::RaggedRow: return "RaggedRow";
    case ErrorCode::EmptyDirectory: return "EmptyDirectory";
    case ErrorCode::InvalidValue: return "InvalidValue";
    case ErrorCode::UnknownTemplate: return "UnknownTemplate";
    case ErrorCode::Config: return "Config";
    case ErrorCode::Io: return "Io";
    case ErrorCode::Validation: return "Validation";
    case ErrorCode::InvalidPlan: return "InvalidPlan";
    }
    return "Unknown";
}

ParseError::ParseError(ErrorCode code, std::size_t line, std::size_t column, const std::string& message)
    : Error(code, std::to_string(line) + ":" + std::to_string(column) + ": " + message),
      line_(line), column_(column), message_(message) {}

} // namespace sgf
