#pragma once

#include <stdexcept>
#include <string>

namespace rmpc {

// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Raised by the parsers; line/column are 1-based when known, 0 for inputs
// without a useful location (JSON bodies).
struct ParseError : Error {
    ParseError(std::string msg, int line, int column)
        : Error("parse error at " + std::to_string(line) + ":" + std::to_string(column) + ": " + msg),
          line(line),
          column(column) {}
    explicit ParseError(const std::string& msg) : Error("parse error: " + msg) {}
    int line = 0;
    int column = 0;
};

// Input term violates a structural invariant (duplicate key, committed choice
// on both sides, keyed prefix under an unkeyed one, ...).
struct IllFormedError : Error {
    using Error::Error;
};

// State-space exploration hit the configured state cap.
struct TruncatedError : Error {
    using Error::Error;
};

// Numeric analysis requested on a chain that does not support it.
struct NotErgodicError : Error {
    using Error::Error;
};

// Linear solve failed or a residual exceeded its tolerance.
struct NumericError : Error {
    using Error::Error;
};

// A cross-check between two independent decision procedures disagreed.
struct AuditError : Error {
    using Error::Error;
};

}  // namespace rmpc
