#pragma once

#include <stdexcept>
#include <string>

namespace gmeans {

/// Precondition violated or a quantity left its mathematical domain.
class domain_fault : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// An iterative method exhausted its budget before meeting its tolerance.
class convergence_failure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A result would overflow double precision.
class saturation : public std::overflow_error {
public:
    using std::overflow_error::overflow_error;
};

/// Malformed function spec or coefficient file.
class parse_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

} // namespace gmeans
