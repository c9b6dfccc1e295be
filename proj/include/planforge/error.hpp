#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace planforge {

// Every domain failure carries a stable machine-readable code
// (e.g. "UnknownChannel2Value") next to the human message.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

// Text-format failure with a location. `position` is a byte offset into the
// input; `line`/`column` are 1-based and 0 when not tracked.
class ParseError : public Error {
public:
    ParseError(std::size_t position, std::string expected,
               std::size_t line = 0, std::size_t column = 0)
        : Error("ParseError", describe(position, expected, line, column)),
          position_(position), line_(line), column_(column),
          expected_(std::move(expected)) {}

    std::size_t position() const noexcept { return position_; }
    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }
    const std::string& expected() const noexcept { return expected_; }

private:
    static std::string describe(std::size_t position, const std::string& expected,
                                std::size_t line, std::size_t column) {
        std::string s = "parse error at position " + std::to_string(position);
        if (line > 0)
            s += " (line " + std::to_string(line) + ", column " + std::to_string(column) + ")";
        return s + ": expected " + expected;
    }

    std::size_t position_;
    std::size_t line_;
    std::size_t column_;
    std::string expected_;
};

}  // namespace planforge
