#pragma once

#include <stdexcept>
#include <string>

namespace dse {

/// Bad flags, bad option values, incompatible settings. CLI exit code 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input data, unsatisfiable generation requests,
/// missing files. CLI exit code 3.
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Non-finite losses or gradients during training. CLI exit code 4.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace dse
