#pragma once

#include <stdexcept>
#include <string>

namespace foodshock {

/// Input could not be read or parsed (missing file, bad number, unknown code).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input was readable but violates a structural invariant.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace foodshock
