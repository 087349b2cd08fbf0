#pragma once

#include <stdexcept>
#include <string>

namespace ewlab {

// Error categories double as CLI exit codes.
enum class ErrorKind { config = 1, numerical = 2, invariant = 3 };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }
    int exit_code() const noexcept { return static_cast<int>(kind_); }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
    throw Error(kind, what);
}

inline constexpr const char* kVersion = "0.3.0";

}  // namespace ewlab
