#pragma once

#include <stdexcept>
#include <string>

namespace smoothcert {

struct ShapeError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct TrainingError : std::runtime_error {
    TrainingError(const std::string& what, std::size_t step)
        : std::runtime_error(what + " (step " + std::to_string(step) + ")"), step(step) {}
    std::size_t step;
};

struct AttackError : std::runtime_error {
    AttackError(const std::string& what, std::size_t step)
        : std::runtime_error(what + " (step " + std::to_string(step) + ")"), step(step) {}
    std::size_t step;
};

}  // namespace smoothcert
