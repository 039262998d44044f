#include "loadsr/error.hpp"

#include <fmt/core.h>

namespace loadsr {

std::string_view to_string(ErrorKind kind) noexcept
{
    switch (kind) {
    case ErrorKind::InvalidLibrary: return "invalid-library";
    case ErrorKind::NumericDomain: return "numeric-domain";
    case ErrorKind::InvalidDepth: return "invalid-depth";
    case ErrorKind::InvalidAction: return "invalid-action";
    case ErrorKind::InvalidConfig: return "invalid-config";
    case ErrorKind::InvalidArgument: return "invalid-argument";
    case ErrorKind::InvalidInput: return "invalid-input";
    case ErrorKind::EmptyPool: return "empty-pool";
    case ErrorKind::Ingestion: return "ingestion";
    case ErrorKind::InvalidLag: return "invalid-lag";
    case ErrorKind::FitFailed: return "fit-failed";
    case ErrorKind::Parse: return "parse";
    case ErrorKind::SearchFailed: return "search-failed";
    }
    return "unknown";
}

ParseError::ParseError(std::size_t position, const std::string& message)
    : Error(ErrorKind::Parse, fmt::format("at position {}: {}", position, message)), position_(position)
{
}

} // namespace loadsr
