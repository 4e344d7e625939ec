#pragma once

#include <stdexcept>
#include <string>

namespace opcalc {

/// Base of every error raised by the engine.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Evaluation point lies on a pole of a coefficient function or special function.
class PoleError : public Error {
public:
    using Error::Error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

/// Argument outside the supported domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

class OverflowError : public Error {
public:
    using Error::Error;
};

class NumericDerivativeError : public Error {
public:
    using Error::Error;
};

/// A series did not meet its tail threshold within the truncation policy.
class PolicyExhausted : public Error {
public:
    using Error::Error;
};

class ConvergenceError : public Error {
public:
    using Error::Error;
};

/// An integrand returned inf/nan; the abscissa is kept for diagnostics.
class NonFiniteSample : public Error {
public:
    NonFiniteSample(const std::string& what, double abscissa)
        : Error(what), abscissa_(abscissa) {}
    double abscissa() const noexcept { return abscissa_; }

private:
    double abscissa_;
};

class PoleLocationError : public Error {
public:
    using Error::Error;
};

class UnknownEntry : public Error {
public:
    using Error::Error;
};

class UnknownFixture : public Error {
public:
    using Error::Error;
};

class UnknownPreset : public Error {
public:
    using Error::Error;
};

/// Parameter outside its validity range; the message names the constraint.
class ParamError : public Error {
public:
    using Error::Error;
};

class FixtureConditionError : public Error {
public:
    using Error::Error;
};

/// Spec-document syntax error with 1-based position.
class SyntaxError : public Error {
public:
    SyntaxError(const std::string& what, int line, int column)
        : Error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what),
          line_(line), column_(column) {}
    int line() const noexcept { return line_; }
    int column() const noexcept { return column_; }

private:
    int line_;
    int column_;
};

}  // namespace opcalc
