#pragma once

#include <stdexcept>
#include <string>

namespace d2d {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid scenario or run configuration. `field()` names the offending key.
class ConfigError : public Error {
public:
    ConfigError(std::string field, const std::string& what)
        : Error(field + ": " + what), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

class DatasetError : public Error {
public:
    using Error::Error;
};

class SingularCovariance : public Error {
public:
    using Error::Error;
};

class QpNotConverged : public Error {
public:
    using Error::Error;
};

class NoBoundaryVector : public Error {
public:
    using Error::Error;
};

class DualityGapError : public Error {
public:
    using Error::Error;
};

class DegenerateSet : public Error {
public:
    using Error::Error;
};

/// Solver breakdown: simplex iteration cap, broken steering monotonicity, etc.
class NumericalFailure : public Error {
public:
    using Error::Error;
};

}  // namespace d2d
