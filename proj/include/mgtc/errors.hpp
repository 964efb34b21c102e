#pragma once

#include <stdexcept>
#include <string>

namespace mgtc {

// Thrown on malformed shapes wired together (programming or config error).
struct ShapeError : std::runtime_error {
    explicit ShapeError(const std::string& msg) : std::runtime_error(msg) {}
};

// Thrown on malformed files: corpus lines, checkpoints, embedding files.
struct FormatError : std::runtime_error {
    explicit FormatError(const std::string& msg) : std::runtime_error(msg) {}
};

// Thrown on bad user input: invariant violations, mismatched vocab, bad flags.
struct ValidationError : std::runtime_error {
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace mgtc
