#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace nftgraph {

enum class ErrorCode {
    Malformed,
    Io,
    UnsortedInput,
    UnknownNode,
    NegativeAge,
    EmptyView,
    TooSmall,
    NoPairs,
    Degenerate,
    Parse,
    Disconnected,
    TooLarge,
    Timeout,
    InsufficientNodes,
    BadRecord,
    BadCache,
    Usage,
};

std::string_view to_string(ErrorCode code);

/// Every recoverable failure in the library is reported as an Error carrying a code.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace nftgraph
