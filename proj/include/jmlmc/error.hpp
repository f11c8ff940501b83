#pragma once

#include <stdexcept>
#include <string>

namespace jmlmc {

/// Base of all library errors. The CLI maps each subclass to an exit code.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid configuration or parameters.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// A numerical stage failed (embedding, meshing, linear solve, ...).
class NumericalError : public Error {
public:
    using Error::Error;
};

/// Filesystem or serialization failure.
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace jmlmc
