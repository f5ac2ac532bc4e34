#pragma once

#include <stdexcept>
#include <string>

namespace trajcast {

// Error taxonomy shared by every module. The CLI maps these onto exit codes:
// config errors -> 1, data/ingest/io errors -> 2, anything else -> 3.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid model parameters, fractions, grids, or experiment configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

// Malformed call arguments (empty window, length mismatch, dimension mismatch).
class InvalidInputError : public Error {
public:
    using Error::Error;
};

// Not enough observations to perform the requested operation.
class InsufficientDataError : public Error {
public:
    using Error::Error;
};

// Least-squares design with zero energy (V_n = 0).
class DegenerateDesignError : public Error {
public:
    using Error::Error;
};

// Unparseable or out-of-order rows in a tick file.
class IngestError : public Error {
public:
    using Error::Error;
};

// Filesystem failures (unreadable input, unwritable output).
class IoError : public Error {
public:
    using Error::Error;
};

} // namespace trajcast
