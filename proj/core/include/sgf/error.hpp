#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace sgf {

enum class ErrorCode {
    Syntax,
    ArityMismatch,
    DuplicateOutputName,
    UnknownRelation,
    NotConforming,
    VariableAbsent,
    MissingUpstreamOutput,
    ReduceError,
    MalformedMessage,
    OverlappingFormulaVariables,
    NotEligible,
    MissingStats,
    NoCondition,
    TooLarge,
    StrategyInapplicable,
    RaggedRow,
    EmptyDirectory,
    InvalidValue,
    UnknownTemplate,
    Config,
    Io,
    Validation,
    InvalidPlan,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries a machine-checkable code.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// Parse failures report the 1-based line/column of the offending token.
class ParseError : public Error {
public:
    ParseError(ErrorCode code, std::size_t line, std::size_t column, const std::string& message);
    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }
    const std::string& message() const noexcept { return message_; }

private:
    std::size_t line_;
    std::size_t column_;
    std::string message_;
};

} // namespace sgf
