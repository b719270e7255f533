#pragma once

#include <stdexcept>
#include <string>

namespace mtpose {

/// Base class for all errors raised by the harness.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what_arg) : std::runtime_error(what_arg) {}
};

/// Malformed input text (JSON syntax, unexpected schema shape).
class ParseError : public Error {
public:
    using Error::Error;
};

/// Structurally valid input violating a domain invariant
/// (wrong landmark count, duplicate sample id, out-of-range index).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Filesystem or OS-level failure.
class IoError : public Error {
public:
    using Error::Error;
};

/// Invalid configuration or parameter value.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Geometry degenerate beyond what an operation can handle.
class GeometryError : public Error {
public:
    using Error::Error;
};

/// External adapter misbehaved on the wire (bad handshake, malformed reply).
class ProtocolError : public Error {
public:
    using Error::Error;
};

/// A verifier was handed fewer data points than its statistic needs.
class InsufficientDataError : public Error {
public:
    using Error::Error;
};

}  // namespace mtpose
