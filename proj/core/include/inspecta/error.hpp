#pragma once

#include <stdexcept>
#include <string>

namespace inspecta {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// File or stream level failure (missing file, short read, bad magic).
struct IoError : Error {
    using Error::Error;
};

/// A domain invariant does not hold (manifest, box, split, model shape).
struct ValidationError : Error {
    using Error::Error;
};

/// Bad user-supplied configuration (CLI flags, config JSON).
struct ConfigError : Error {
    using Error::Error;
};

}  // namespace inspecta
