#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace lpakit {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad user input: unknown names, missing parameters, invalid settings.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Kinetics produced a non-finite value.
class EvaluationError : public Error {
public:
    EvaluationError(const std::string& what, std::string component)
        : Error(what), component_(std::move(component)) {}
    const std::string& component() const { return component_; }

private:
    std::string component_;
};

/// An iterative solver ran out of iterations.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double residual)
        : Error(what), residual_(residual) {}
    double residual() const { return residual_; }

private:
    double residual_;
};

class SingularMatrixError : public Error {
public:
    SingularMatrixError(const std::string& what, double condition_estimate)
        : Error(what), condition_estimate_(condition_estimate) {}
    double condition_estimate() const { return condition_estimate_; }

private:
    double condition_estimate_;
};

class IntegrationError : public Error {
public:
    IntegrationError(const std::string& what, double last_time)
        : Error(what), last_time_(last_time) {}
    double last_time() const { return last_time_; }

private:
    double last_time_;
};

/// The requested analysis does not apply to the input (e.g. no sign change
/// for an edge search, no bifurcation to seed a curve).
class NotApplicableError : public Error {
public:
    using Error::Error;
};

}  // namespace lpakit
