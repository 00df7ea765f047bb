#pragma once

#include <stdexcept>
#include <string>

namespace fedkg {

enum class ErrorKind {
    NotFound,
    InvalidArgument,
    Parse,
    Rewrite,
    Endpoint,
    Timeout,
    Protocol,
    Evaluation,
    Config,
    Skip,
};

inline const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::NotFound: return "not_found";
        case ErrorKind::InvalidArgument: return "invalid_argument";
        case ErrorKind::Parse: return "parse_error";
        case ErrorKind::Rewrite: return "rewrite_error";
        case ErrorKind::Endpoint: return "endpoint_error";
        case ErrorKind::Timeout: return "timeout";
        case ErrorKind::Protocol: return "protocol_error";
        case ErrorKind::Evaluation: return "evaluation_error";
        case ErrorKind::Config: return "config_error";
        case ErrorKind::Skip: return "skipped";
    }
    return "error";
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

} // namespace fedkg
