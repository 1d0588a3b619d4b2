#pragma once

#include <stdexcept>
#include <string>

namespace shapekrrc {

// Base class for everything this library throws on purpose.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad arguments: non-finite coordinates, k < 3, non-positive bandwidth,
// a matrix that fails a unitarity check, and similar.
struct InvalidInput : Error {
    using Error::Error;
};

// All landmarks coincide; the configuration has zero size after centering.
struct DegenerateConfiguration : Error {
    using Error::Error;
};

struct EmptyInput : Error {
    using Error::Error;
};

// Failed file write or rename.
struct IoError : Error {
    using Error::Error;
};

// A training category with no samples.
struct EmptyClass : Error {
    using Error::Error;
};

// (K + lambda I) was not positive definite at fit time.
struct FactorizationFailure : Error {
    FactorizationFailure(const std::string& msg, int class_label, double gram_min_eigenvalue)
        : Error(msg), class_label(class_label), gram_min_eigenvalue(gram_min_eigenvalue) {}
    int class_label;
    double gram_min_eigenvalue;
};

// Top two eigenvalues of the averaged embedding are too close to call.
struct NonUniqueMean : Error {
    using Error::Error;
};

struct InsufficientClassSize : Error {
    using Error::Error;
};

struct LabelMismatch : Error {
    using Error::Error;
};

struct ParseError : Error {
    ParseError(const std::string& msg, std::size_t line) : Error(msg), line(line) {}
    std::size_t line;
};

struct InconsistentLandmarkCount : Error {
    InconsistentLandmarkCount(const std::string& msg, std::size_t line) : Error(msg), line(line) {}
    std::size_t line;
};

struct UnknownLabel : Error {
    using Error::Error;
};

}  // namespace shapekrrc
