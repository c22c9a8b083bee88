#pragma once

#include <stdexcept>
#include <string>

namespace opotk {

/// Error class for malformed input files and bad configuration.
/// Domain violations (e.g. pumping above threshold) use std::domain_error;
/// precondition violations on otherwise well-formed values use
/// std::invalid_argument. The CLI maps ParseError to exit code 2 and the
/// std errors to exit code 3.
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace opotk
