#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sofas {

/// Base for every error the library raises. The C API maps each subclass to a status code.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed text record. Line and column are 1-based.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line, std::size_t column)
        : Error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what),
          line_(line), column_(column) {}

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

/// Coordinates or dimensions that do not fit the sensor.
class GeometryError : public Error {
public:
    using Error::Error;
};

/// Timestamp regression in an event sequence.
class OrderingError : public Error {
public:
    OrderingError(const std::string& what, std::size_t index)
        : Error(what + " (index " + std::to_string(index) + ")"), index_(index) {}

    std::size_t index() const noexcept { return index_; }

private:
    std::size_t index_;
};

/// Internal bookkeeping violated, e.g. retracting an event that was never accumulated.
class ConsistencyError : public Error {
public:
    using Error::Error;
};

/// Bad configuration value; the message always names the key.
class ConfigError : public Error {
public:
    ConfigError(const std::string& key, const std::string& what)
        : Error("config key '" + key + "': " + what), key_(key) {}

    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

class IoError : public Error {
public:
    using Error::Error;
};

/// Argument outside an operation's domain (zero-length pendulum, empty statistics input, ...).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

} // namespace sofas
