#pragma once

#include <stdexcept>
#include <string>

namespace thermoflow {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid input to a geometric or algebraic operation.
class DomainError : public Error {
public:
    using Error::Error;
};

/// A documented precondition of an operation does not hold.
class PreconditionError : public Error {
public:
    using Error::Error;
};

/// Adaptive integration could not proceed (step-size underflow, step budget exhausted).
class IntegrationError : public Error {
public:
    IntegrationError(const std::string& what, double last_good_time)
        : Error(what), last_good_time_(last_good_time) {}
    double last_good_time() const noexcept { return last_good_time_; }

private:
    double last_good_time_;
};

/// A conjugate point makes a boundary-value problem singular or ill-conditioned.
class ConjugatePointError : public Error {
public:
    ConjugatePointError(const std::string& what, double horizon)
        : Error(what), horizon_(horizon) {}
    double horizon() const noexcept { return horizon_; }

private:
    double horizon_;
};

} // namespace thermoflow
