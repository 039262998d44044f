#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace loadsr {

enum class ErrorKind {
    InvalidLibrary,
    NumericDomain,
    InvalidDepth,
    InvalidAction,
    InvalidConfig,
    InvalidArgument,
    InvalidInput,
    EmptyPool,
    Ingestion,
    InvalidLag,
    FitFailed,
    Parse,
    SearchFailed,
};

std::string_view to_string(ErrorKind kind) noexcept;

// Single exception type for the library; callers switch on kind().
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

// Parse errors carry the byte offset of the offending token.
class ParseError : public Error {
public:
    ParseError(std::size_t position, const std::string& message);

    [[nodiscard]] std::size_t position() const noexcept { return position_; }

private:
    std::size_t position_;
};

} // namespace loadsr
