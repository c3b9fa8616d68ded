#pragma once

#include <stdexcept>
#include <string>

namespace seqprobe {

// Error taxonomy. The CLI maps these onto distinct exit codes:
// validation -> 2, compute -> 3, I/O -> 4.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct ShapeError : Error {
    using Error::Error;
};

struct LabelError : Error {
    using Error::Error;
};

struct StateError : Error {
    using Error::Error;
};

struct InputError : Error {
    using Error::Error;
};

struct FormatError : Error {
    using Error::Error;
};

struct AlignmentError : Error {
    using Error::Error;
};

struct CompatibilityError : Error {
    using Error::Error;
};

struct CheckError : Error {
    using Error::Error;
};

struct ValidationError : Error {
    using Error::Error;
};

struct ComputeError : Error {
    using Error::Error;
};

struct IoError : Error {
    using Error::Error;
};

}  // namespace seqprobe
