#pragma once

#include <stdexcept>
#include <string>

namespace skelaug {

inline constexpr const char* kVersion = "0.1.0";

// Violated precondition or call-site contract (bad shapes, bad arguments).
struct contract_error : std::logic_error {
    explicit contract_error(const std::string& msg) : std::logic_error(msg) {}
};

// Unreadable, malformed, or inconsistent input data.
struct data_error : std::runtime_error {
    explicit data_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Non-finite values or diverged numerics at run time.
struct numeric_error : std::runtime_error {
    explicit numeric_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace skelaug
