#pragma once

#include <stdexcept>
#include <string>

namespace gqcc {

// Process exit codes used by the command-line tool.
enum class ExitCode : int {
    ok = 0,
    config = 2,
    data = 3,
    numerical = 4,
};

class Error : public std::runtime_error {
public:
    Error(ExitCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    [[nodiscard]] ExitCode code() const noexcept { return code_; }

private:
    ExitCode code_;
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(ExitCode::config, what) {}
};

class DataError : public Error {
public:
    explicit DataError(const std::string& what) : Error(ExitCode::data, what) {}
};

// Degenerate numerical state: empty kernel neighbourhoods, vanishing density
// estimates, non-positive scaling factors.
class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& what) : Error(ExitCode::numerical, what) {}
};

class EmptyNeighborhoodError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

}  // namespace gqcc
