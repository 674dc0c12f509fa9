// opaquer: error types shared by the whole library.
#pragma once

#include <stdexcept>
#include <string>

namespace opaquer {

// Anything wrong with the caller's input: malformed model text, references to
// undeclared states or events, violated API preconditions. Maps to exit code 3
// in the CLI.
struct ModelError : std::runtime_error {
    explicit ModelError(const std::string& what) : std::runtime_error(what) {}
};

// A configured cap was exceeded (observer estimates, enumeration budget).
// Maps to exit code 4 in the CLI.
struct ResourceError : std::runtime_error {
    explicit ResourceError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace opaquer
