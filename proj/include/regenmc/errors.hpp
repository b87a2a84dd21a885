#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace regenmc {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Expression text could not be parsed. Carries the byte offset of the
/// offending token and a description of what was expected.
class SyntaxError : public Error {
public:
    SyntaxError(std::size_t offset, const std::string& expected)
        : Error("syntax error at offset " + std::to_string(offset) + ": expected " + expected),
          offset_(offset), expected_(expected) {}
    std::size_t offset() const { return offset_; }
    const std::string& expected() const { return expected_; }

private:
    std::size_t offset_;
    std::string expected_;
};

class UnknownFunction : public Error {
public:
    UnknownFunction(std::size_t offset, const std::string& name)
        : Error("unknown function '" + name + "' at offset " + std::to_string(offset)),
          offset_(offset), name_(name) {}
    std::size_t offset() const { return offset_; }
    const std::string& name() const { return name_; }

private:
    std::size_t offset_;
    std::string name_;
};

/// Any identifier other than the bound variable `x`.
class UnknownIdentifier : public Error {
public:
    UnknownIdentifier(std::size_t offset, const std::string& name)
        : Error("unknown identifier '" + name + "' at offset " + std::to_string(offset) +
                " (only 'x' is bound)"),
          offset_(offset), name_(name) {}
    std::size_t offset() const { return offset_; }
    const std::string& name() const { return name_; }

private:
    std::size_t offset_;
    std::string name_;
};

/// Evaluation left the mathematical domain (sqrt of a negative, log of a
/// non-positive, division by zero, ...). Carries the offending subterm and
/// the point at which it was evaluated.
class DomainError : public Error {
public:
    DomainError(const std::string& subterm, double x, const std::string& reason)
        : Error("domain error in '" + subterm + "' at x = " + std::to_string(x) + ": " + reason),
          subterm_(subterm), x_(x) {}
    const std::string& subterm() const { return subterm_; }
    double x() const { return x_; }

private:
    std::string subterm_;
    double x_;
};

/// The integrand cannot be evaluated on a positive-measure part of the line.
class NonEvaluable : public Error {
public:
    using Error::Error;
};

class NoSamples : public Error {
public:
    NoSamples() : Error("cycle was generated without retain_samples") {}
};

class GridOutOfRange : public Error {
public:
    using Error::Error;
};

class TooFewSamples : public Error {
public:
    using Error::Error;
};

class TooFewCycles : public Error {
public:
    using Error::Error;
};

class ZeroDenominator : public Error {
public:
    using Error::Error;
};

class IntegrabilityRefused : public Error {
public:
    using Error::Error;
};

/// Fewer exceedances than the tail regression needs at its largest grid point.
class InsufficientTail : public Error {
public:
    using Error::Error;
};

}  // namespace regenmc
