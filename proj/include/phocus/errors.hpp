#pragma once

#include <stdexcept>
#include <string>

namespace phocus {

// Base class for all errors raised by the library.
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed input document or training file.
struct parse_error : error {
    using error::error;
};

// A requested paper, author, or stored artifact does not exist.
struct not_found_error : error {
    using error::error;
};

// A pipeline stage requires a model that has not been registered.
struct model_missing_error : error {
    using error::error;
};

// Influence propagation failed to converge within the iteration budget.
struct divergence_error : error {
    using error::error;
};

} // namespace phocus
