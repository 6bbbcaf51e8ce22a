#pragma once

#include <stdexcept>
#include <string>

namespace dforge {

// Bad input data: malformed files, shape mismatches, parameter domain violations.
// The CLI maps this to exit code 2.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Failures of a wrapped external denoiser process. CLI exit code 3.
class ExternalDenoiserError : public std::runtime_error {
public:
    enum class Kind { LaunchFailed, NonZeroExit, Timeout, MissingOutput, ShapeMismatch };

    ExternalDenoiserError(Kind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

}  // namespace dforge
