#pragma once
#include <stdexcept>
#include <string>

namespace stm {

struct error : std::runtime_error {
    explicit error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad caller-supplied value (negative eps, p < 1, unknown id, ...).
struct argument_error : error {
    explicit argument_error(const std::string& msg) : error(msg) {}
};

// Operation contract not met by the inputs (missing basepoint, invalid space, ...).
struct precondition_error : error {
    explicit precondition_error(const std::string& msg) : error(msg) {}
};

// Request exceeds a documented capability bound (exact search size caps).
struct capability_error : error {
    explicit capability_error(const std::string& msg) : error(msg) {}
};

// A space failed invariant validation where a valid one was required.
struct validation_error : error {
    explicit validation_error(const std::string& msg) : error(msg) {}
};

// Disconnected causal graph; message names a witness pair.
struct disconnected_error : error {
    explicit disconnected_error(const std::string& msg) : error(msg) {}
};

struct io_error : error {
    explicit io_error(const std::string& msg) : error(msg) {}
};

} // namespace stm
