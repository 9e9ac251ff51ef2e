#pragma once

#include <stdexcept>
#include <string>

namespace intelguard {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Caller supplied something malformed (bad positions, empty text, unknown id).
class InputError : public Error {
public:
    using Error::Error;
};

// A field failed schema or enumeration checks while decoding.
class SchemaError : public Error {
public:
    using Error::Error;
};

// Weights, dimensions or embedder identity are inconsistent.
class ConfigError : public Error {
public:
    using Error::Error;
};

// Remote provider or embedder failed; the operation may be retried.
class RetriableError : public Error {
public:
    using Error::Error;
};

class DegenerateClusterError : public Error {
public:
    using Error::Error;
};

}  // namespace intelguard
