#pragma once

#include <stdexcept>
#include <string>

namespace stance {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input data (files, annotations, manifests).
class DataError : public Error {
public:
    using Error::Error;
};

/// A caller violated an operation's precondition.
class PreconditionError : public Error {
public:
    using Error::Error;
};

}  // namespace stance
