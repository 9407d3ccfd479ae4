#pragma once

#include <stdexcept>
#include <string>

namespace gdce {

// Malformed or inconsistent input data: files, formats, incompatible artifacts.
struct DataError : std::runtime_error {
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical failure during computation (divergence, NaN loss).
struct NumericalError : std::runtime_error {
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace gdce
