#pragma once

#include <stdexcept>
#include <string>

namespace qsim {

enum class ErrorCode {
    SyntaxError,
    UnsupportedFeature,
    SemanticError,
    ArityMismatch,
    EmptyInput,
    UntrustedRange,
    NotARead,
    NotAWrite,
    AlreadyRewritten,
    UnknownTable,
    UnknownColumn,
    TypeError,
    IoError,
    AdapterUnavailable,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + message), code_(code) {}

    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

/// Syntax error with source position and an expected-token hint.
class ParseError : public Error {
public:
    ParseError(int line, int column, const std::string& message)
        : Error(ErrorCode::SyntaxError,
                "line " + std::to_string(line) + ":" + std::to_string(column) + ": " + message),
          line_(line), column_(column) {}

    int line() const { return line_; }
    int column() const { return column_; }

private:
    int line_;
    int column_;
};

inline const char* error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::SyntaxError: return "SYNTAX_ERROR";
        case ErrorCode::UnsupportedFeature: return "UNSUPPORTED_FEATURE";
        case ErrorCode::SemanticError: return "SEMANTIC_ERROR";
        case ErrorCode::ArityMismatch: return "ARITY_MISMATCH";
        case ErrorCode::EmptyInput: return "EMPTY_INPUT";
        case ErrorCode::UntrustedRange: return "UNTRUSTED_RANGE";
        case ErrorCode::NotARead: return "NOT_A_READ";
        case ErrorCode::NotAWrite: return "NOT_A_WRITE";
        case ErrorCode::AlreadyRewritten: return "ALREADY_REWRITTEN";
        case ErrorCode::UnknownTable: return "UNKNOWN_TABLE";
        case ErrorCode::UnknownColumn: return "UNKNOWN_COLUMN";
        case ErrorCode::TypeError: return "TYPE_ERROR";
        case ErrorCode::IoError: return "IO_ERROR";
        case ErrorCode::AdapterUnavailable: return "ADAPTER_UNAVAILABLE";
    }
    return "UNKNOWN";
}

} // namespace qsim
