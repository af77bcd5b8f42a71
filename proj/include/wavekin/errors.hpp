#pragma once

#include <stdexcept>
#include <string>

namespace wavekin {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad configuration, schema violation, or unusable input file.
struct ConfigError : Error {
    using Error::Error;
};

// Degenerate field (vanishing norm); a configuration problem, not a numerics one.
struct DegenerateFieldError : ConfigError {
    using ConfigError::ConfigError;
};

// Non-finite or otherwise invalid argument to a math operation.
struct DomainError : Error {
    using Error::Error;
};

// API misuse: off-node grid access, boundary stencil, refining a sampled field.
struct UsageError : Error {
    using Error::Error;
};

// Direction of the group velocity is undefined (massless dispersion at k = 0).
struct SingularityError : Error {
    using Error::Error;
};

// An internal sanity assertion on computed quantities failed (signals a bad grid,
// not a bad config): e.g. a centroid integral grew a real imaginary part.
struct NumericalConsistencyError : Error {
    using Error::Error;
};

} // namespace wavekin
