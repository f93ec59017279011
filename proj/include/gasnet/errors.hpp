#pragma once

#include <stdexcept>
#include <string>

namespace gasnet {

// Malformed or inconsistent user input (documents, CLI values). CLI exit code 2.
struct input_error : std::runtime_error {
    explicit input_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Structurally valid input that violates a mathematical precondition
// (negative density, ratio below one, singular volume matrix). CLI exit code 2.
struct domain_error : std::runtime_error {
    explicit domain_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Iteration failed to converge or the problem is infeasible. CLI exit code 1.
struct solver_error : std::runtime_error {
    explicit solver_error(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace gasnet
