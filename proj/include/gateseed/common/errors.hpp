#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace gateseed {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Argument outside its documented domain (channel count, threshold order,
// scale factor, confidence threshold, ...).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

class ShapeError : public Error {
public:
    using Error::Error;
};

// Numeric failure: non-convergence, non-PD covariance, NaN loss.
class NumericError : public Error {
public:
    explicit NumericError(const std::string& what, double residual = 0.0)
        : Error(what), residual_(residual) {}
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

// Operation invoked out of order (e.g. backward without a train-mode cache).
class StateError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    IoError(const std::string& path, const std::string& what)
        : Error(path + ": " + what), path_(path) {}
    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

class ParseError : public Error {
public:
    ParseError(const std::string& source, std::size_t line, const std::string& what)
        : Error(source + ":" + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

// Label or annotation violating its invariants on load.
class ValidationError : public Error {
public:
    using Error::Error;
};

class GenerationError : public Error {
public:
    GenerationError(std::uint64_t seed, const std::string& what)
        : Error("scene seed " + std::to_string(seed) + ": " + what), seed_(seed) {}
    std::uint64_t seed() const noexcept { return seed_; }

private:
    std::uint64_t seed_;
};

}  // namespace gateseed
