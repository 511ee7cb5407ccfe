#pragma once

#include <stdexcept>
#include <string>

namespace gkit {

/// Base class for all gkit errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class DimensionMismatch : public Error {
public:
    explicit DimensionMismatch(const std::string& what) : Error(what) {}
};

/// A sign/extreme-point enumeration would exceed the configured limit.
/// Callers must raise the limit explicitly instead of waiting forever.
class EnumLimitExceeded : public Error {
public:
    explicit EnumLimitExceeded(const std::string& what) : Error(what) {}
};

/// Only a norm interval straddling the decision threshold is available.
class InexactNorm : public Error {
public:
    explicit InexactNorm(const std::string& what) : Error(what) {}
};

class NonFiniteEntries : public Error {
public:
    explicit NonFiniteEntries(const std::string& what) : Error(what) {}
};

class NotInfInfDomains : public Error {
public:
    explicit NotInfInfDomains(const std::string& what) : Error(what) {}
};

class IndexOutOfRange : public Error {
public:
    explicit IndexOutOfRange(const std::string& what) : Error(what) {}
};

class InvalidPermutation : public Error {
public:
    explicit InvalidPermutation(const std::string& what) : Error(what) {}
};

class InvalidInterval : public Error {
public:
    explicit InvalidInterval(const std::string& what) : Error(what) {}
};

class NonFiniteKernelValue : public Error {
public:
    explicit NonFiniteKernelValue(const std::string& what) : Error(what) {}
};

class AsymmetricGrids : public Error {
public:
    explicit AsymmetricGrids(const std::string& what) : Error(what) {}
};

class GridMismatch : public Error {
public:
    explicit GridMismatch(const std::string& what) : Error(what) {}
};

class InvalidInput : public Error {
public:
    explicit InvalidInput(const std::string& what) : Error(what) {}
};

/// File/JSON/CSV parse failure (CLI exit code 1).
class ParseError : public Error {
public:
    explicit ParseError(const std::string& what) : Error(what) {}
};

} // namespace gkit
