#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace xtract {

enum class ErrorCode {
    io_error,
    parse_error,
    method_not_found,
    ambiguous_method,
    empty_range,
    not_aligned,
    method_too_large,
    provider_unreachable,
    plan_conflict,
    stale_unit,
    render_error,
    insufficient_samples,
    empty_oracle,
    invalid_config,
};

[[nodiscard]] std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code)
    {
    }

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

// Grammar rejection, with the 1-based position of the first offending token.
class ParseError : public Error {
public:
    ParseError(const std::string& message, int line, int column)
        : Error(ErrorCode::parse_error, message), line_(line), column_(column)
    {
    }

    [[nodiscard]] int line() const noexcept { return line_; }
    [[nodiscard]] int column() const noexcept { return column_; }

private:
    int line_;
    int column_;
};

}  // namespace xtract
