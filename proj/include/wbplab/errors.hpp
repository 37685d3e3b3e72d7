#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace wbplab {

// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid argument or configuration value.
struct ParamError : Error {
    using Error::Error;
};

// Text input that does not conform to the expected format.
struct ParseError : Error {
    ParseError(const std::string& msg, std::size_t line)
        : Error(msg + " (line " + std::to_string(line) + ")"), line(line) {}
    std::size_t line;
};

// Structural violation: rank failure, mismatched graph, message overflow.
struct StructuralError : Error {
    using Error::Error;
};

// Requested computation is too large to run exhaustively.
struct FeasibilityError : Error {
    using Error::Error;
};

// Non-finite value encountered during iterative computation.
struct NumericError : Error {
    NumericError(const std::string& msg, std::size_t iteration)
        : Error(msg + " (iteration " + std::to_string(iteration) + ")"),
          iteration(iteration) {}
    std::size_t iteration;
};

}  // namespace wbplab
