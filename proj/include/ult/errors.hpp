#pragma once

#include <stdexcept>
#include <string>

namespace ult {

struct shape_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct domain_error : std::domain_error {
    using std::domain_error::domain_error;
};

struct capacity_error : std::length_error {
    using std::length_error::length_error;
};

struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Raised when a stage of a construction cannot continue (e.g. no path weight found).
struct construction_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace ult
