#pragma once

#include <stdexcept>
#include <string>

namespace susylab {

// Caller broke a precondition (bad sizes, indices, config values).
// The CLI maps these to exit code 2.
class usage_error : public std::invalid_argument {
public:
    explicit usage_error(const std::string& what) : std::invalid_argument(what) {}
};

// A computation failed for numerical reasons (singular body, quadrature
// budget exhausted, non-finite input). The CLI maps these to exit code 3.
class numeric_error : public std::runtime_error {
public:
    explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

}
