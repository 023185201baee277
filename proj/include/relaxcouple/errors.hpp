#pragma once

#include <stdexcept>
#include <string>

namespace relaxcouple {

/// Invalid input or violated structural assumption.
struct validation_error : std::runtime_error {
    explicit validation_error(const std::string& msg) : std::runtime_error(msg) {}
};

/// A time integration blew up (non-finite values detected).
struct instability_error : std::runtime_error {
    explicit instability_error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Filesystem / serialization failure.
struct io_error : std::runtime_error {
    explicit io_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace relaxcouple
