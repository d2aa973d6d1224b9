#pragma once

#include <stdexcept>
#include <string>

namespace infoacq {

// Broken preconditions on shapes or distributions.
struct contract_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Inputs outside the mathematical domain of an operation.
struct domain_error : std::domain_error {
    using std::domain_error::domain_error;
};

struct numeric_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct overflow_error : domain_error {
    using domain_error::domain_error;
};

struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct fit_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct unsupported_error : std::logic_error {
    using std::logic_error::logic_error;
};

} // namespace infoacq
