#pragma once

#include <charconv>
#include <concepts>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace sfis {

// Malformed input text (config files, CLI arguments). CLI exit code 2.
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Structurally valid input that violates a precondition. CLI exit code 3.
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IllPosedConfig : ValidationError {
    using ValidationError::ValidationError;
};

struct EllipticityViolation : ValidationError {
    using ValidationError::ValidationError;
};

// Nonpositive PDE solution values; signals a too-coarse grid.
struct PositivityViolation : ValidationError {
    using ValidationError::ValidationError;
};

// Shortest decimal form that round-trips to the same double.
inline std::string fmt(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

template <std::integral T>
std::string fmt(T v) {
    return std::to_string(v);
}

// Build identifier baked in at compile time.
const char* version();

// Numerical blow-up during integration. CLI exit code 4.
struct SimulationDiverged : std::runtime_error {
    double time;
    SimulationDiverged(const std::string& what, double t)
        : std::runtime_error(what), time(t) {}
    explicit SimulationDiverged(double t)
        : SimulationDiverged("simulation diverged at t = " + fmt(t), t) {}
};

}  // namespace sfis
