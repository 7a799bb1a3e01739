#pragma once

#include <stdexcept>
#include <string>

namespace dqnpm {

enum class ErrorKind {
    io,
    format,
    data,
    alignment,
    range,
    window,
    parameter,
    size,
    index,
    episode,
    underfull,
    degenerate,
    config,
    shape,
    sample,
};

inline const char* to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::io: return "io error";
    case ErrorKind::format: return "format error";
    case ErrorKind::data: return "data error";
    case ErrorKind::alignment: return "alignment error";
    case ErrorKind::range: return "range error";
    case ErrorKind::window: return "window error";
    case ErrorKind::parameter: return "parameter error";
    case ErrorKind::size: return "size error";
    case ErrorKind::index: return "index error";
    case ErrorKind::episode: return "episode error";
    case ErrorKind::underfull: return "underfull error";
    case ErrorKind::degenerate: return "degenerate error";
    case ErrorKind::config: return "configuration error";
    case ErrorKind::shape: return "shape error";
    case ErrorKind::sample: return "sample error";
    }
    return "error";
}

/// Every failure raised by the library carries a kind so the CLI can map
/// it to an exit code.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

/// 1 for I/O and data problems, 2 for configuration and size problems.
inline int exit_code_for(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::io:
    case ErrorKind::format:
    case ErrorKind::data:
    case ErrorKind::alignment:
        return 1;
    default:
        return 2;
    }
}

} // namespace dqnpm
