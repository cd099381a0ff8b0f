#pragma once

#include <stdexcept>
#include <string>

namespace origami {

// Base for every error raised by the library. Input errors are problems with
// user-supplied data (files, ids, coordinates); everything else is internal
// or configuration trouble. The CLI maps the two to exit codes 2 and 1.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual bool is_input_error() const noexcept { return false; }
};

class InputError : public Error {
public:
    using Error::Error;
    bool is_input_error() const noexcept override { return true; }
};

class ConfigError : public Error {
public:
    using Error::Error;
};

// Numerical or structural failure inside a geometric routine.
class GeometryError : public Error {
public:
    using Error::Error;
};

}  // namespace origami
