// Error taxonomy shared by all epm modules.
#pragma once

#include <stdexcept>
#include <string>

namespace epm {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// type invariant violated at construction/validation
struct ValidationError : Error { using Error::Error; };

struct InvalidCoilError : Error { using Error::Error; };
struct SingularGapError : Error { using Error::Error; };
struct SingularSeparationError : Error { using Error::Error; };
struct UnderdeterminedFitError : Error { using Error::Error; };
struct NoPathError : Error { using Error::Error; };
struct InvalidModeError : Error { using Error::Error; };
struct OutOfTravelError : Error { using Error::Error; };

// parse failure in an input file; carries the 1-based line number
struct DataFormatError : Error {
    DataFormatError(const std::string& msg, long line)
        : Error(msg + " (line " + std::to_string(line) + ")"), line_number(line) {}
    long line_number;
};

struct UsageError : Error { using Error::Error; };

} // namespace epm
