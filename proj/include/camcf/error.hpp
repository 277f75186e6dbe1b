#pragma once

#include <stdexcept>
#include <string>

namespace camcf {

/// Raised for every contract violation detected by the library: malformed
/// input files, shape mismatches, invalid configuration.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace camcf
