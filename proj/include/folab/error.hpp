#pragma once

#include <stdexcept>
#include <string>

namespace folab {

// Error kinds map onto process exit codes at the CLI boundary:
// Usage/Parse -> 1, Budget -> 2, Validation/Precondition -> 3.
enum class ErrorKind {
    Usage,
    Parse,
    Budget,
    Validation,
    Precondition,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string msg) : std::runtime_error(std::move(msg)), kind_(kind) {}
    ErrorKind kind() const { return kind_; }

    int exit_code() const {
        switch (kind_) {
        case ErrorKind::Usage:
        case ErrorKind::Parse: return 1;
        case ErrorKind::Budget: return 2;
        case ErrorKind::Validation:
        case ErrorKind::Precondition: return 3;
        }
        return 1;
    }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& msg) { throw Error(kind, msg); }

} // namespace folab
