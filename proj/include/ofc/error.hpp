#pragma once

#include <stdexcept>
#include <string>

namespace ofc {

/// Base class for all toolkit errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed input token or file content.
class ParseError : public Error {
public:
    explicit ParseError(const std::string& what) : Error(what) {}
};

/// Configuration or precondition violation.
class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& what) : Error(what) {}
};

/// A fit-time operation received rows tagged as test data.
class LeakageError : public Error {
public:
    explicit LeakageError(const std::string& what) : Error(what) {}
};

/// A metric whose denominator is 0/0 was requested as a plain value.
class UndefinedMetricError : public Error {
public:
    explicit UndefinedMetricError(const std::string& what) : Error(what) {}
};

} // namespace ofc
