#pragma once

#include <stdexcept>
#include <string>

namespace sdmm {

// Invalid parameters or config files. The CLI maps this to exit code 1.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed or unusable input data (trace CSVs, logs). Exit code 2.
struct DataError : std::runtime_error {
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace sdmm
