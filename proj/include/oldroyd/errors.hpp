#pragma once

#include <array>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace oldroyd {

// Base for every failure raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Misuse of an operation (bad shapes, wrong boundary flags, out-of-range k).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

// Configuration file or run setup is invalid. Maps to CLI exit code 2.
class ConfigError : public Error {
public:
    using Error::Error;
};

// alpha + eps^2 * sigma left the admissible band at some node.
class DensityBandViolation : public Error {
public:
    DensityBandViolation(const std::string& what, std::size_t node, double density)
        : Error(what), node_(node), density_(density) {}

    std::size_t node() const noexcept { return node_; }
    double density() const noexcept { return density_; }

private:
    std::size_t node_;
    double density_;
};

// The pressure law was evaluated outside its validity range.
class PressureRangeError : public Error {
public:
    PressureRangeError(const std::string& what, double density) : Error(what), density_(density) {}
    double density() const noexcept { return density_; }

private:
    double density_;
};

// Iterative linear solve did not reach its tolerance.
class LinearSolveError : public Error {
public:
    LinearSolveError(const std::string& what, int iterations, double residual)
        : Error(what), iterations_(iterations), residual_(residual) {}

    int iterations() const noexcept { return iterations_; }
    double residual() const noexcept { return residual_; }

private:
    int iterations_;
    double residual_;
};

// A characteristic left the closed domain by more than round-off.
class DepartureExcursion : public Error {
public:
    DepartureExcursion(const std::string& what, std::size_t node) : Error(what), node_(node) {}
    std::size_t node() const noexcept { return node_; }

private:
    std::size_t node_;
};

// The local stress update matrix is singular at a node.
class SingularStressSystem : public Error {
public:
    SingularStressSystem(const std::string& what, std::size_t node) : Error(what), node_(node) {}
    std::size_t node() const noexcept { return node_; }

private:
    std::size_t node_;
};

enum class FailureKind { density_band, pressure_range, linear_solve, departure, singular_stress };

// Wraps a failure inside a time loop with the step at which it happened.
class StepFailure : public Error {
public:
    StepFailure(const std::string& what, std::size_t step, FailureKind kind)
        : Error(what), step_(step), kind_(kind) {}

    std::size_t step() const noexcept { return step_; }
    FailureKind kind() const noexcept { return kind_; }

private:
    std::size_t step_;
    FailureKind kind_;
};

}  // namespace oldroyd
