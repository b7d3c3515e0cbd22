#pragma once

#include <stdexcept>
#include <string>

namespace mctl {

/// Failure category. The CLI maps Input/Numeric to exit code 1 and
/// Config to exit code 2 when it originates from command-line flags.
enum class ErrorKind { Input, Config, Numeric };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what);
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

/// Malformed data: bad files, shape mismatches, empty domains.
class InputError : public Error {
public:
    explicit InputError(const std::string& what) : Error(ErrorKind::Input, what) {}
};

/// Invalid hyperparameters or option combinations.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(ErrorKind::Config, what) {}
};

/// Solver breakdown (eigensolver failure, singular systems).
class NumericError : public Error {
public:
    explicit NumericError(const std::string& what) : Error(ErrorKind::Numeric, what) {}
};

const char* to_string(ErrorKind kind) noexcept;

} // namespace mctl
