#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace wirefit {

// Base for every failure the library reports.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

enum class FormatErrorKind {
    BadMagic,
    Truncated,
    SizeMismatch,
    VersionMismatch,
    ShapeMismatch,
    NonFinite,
    Io,
};

std::string_view to_string(FormatErrorKind kind);

// Raised by the .mfi and .mirw readers; kind() distinguishes the failure.
class FormatError : public Error {
public:
    FormatError(FormatErrorKind kind, const std::string& what)
        : Error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    FormatErrorKind kind() const noexcept { return kind_; }

private:
    FormatErrorKind kind_;
};

// S/N requested on an image with no recorded noise level.
class UndefinedSnr : public Error {
public:
    using Error::Error;
};

// The image carries no usable lobe structure (constant, single extremum, ...).
class ClassificationFailure : public Error {
public:
    using Error::Error;
};

class EstimationError : public Error {
public:
    using Error::Error;
};

}  // namespace wirefit
