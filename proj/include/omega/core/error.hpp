#pragma once

#include <stdexcept>
#include <string>

namespace omega {

enum class ErrorKind {
    Structural,
    Precondition,
    Resolution,
    Budget,
    Separation,
    Schedule,
    Range,
    Size,
    Decomposition,
    Construction,
    Usage,
    Schema,
};

inline const char* to_string(ErrorKind k) {
    switch (k) {
        case ErrorKind::Structural: return "structural";
        case ErrorKind::Precondition: return "precondition";
        case ErrorKind::Resolution: return "resolution";
        case ErrorKind::Budget: return "budget";
        case ErrorKind::Separation: return "separation";
        case ErrorKind::Schedule: return "schedule";
        case ErrorKind::Range: return "range";
        case ErrorKind::Size: return "size";
        case ErrorKind::Decomposition: return "decomposition";
        case ErrorKind::Construction: return "construction";
        case ErrorKind::Usage: return "usage";
        case ErrorKind::Schema: return "schema";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& msg)
        : std::runtime_error(std::string(to_string(kind)) + " error: " + msg), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& msg) { throw Error(kind, msg); }

}  // namespace omega
