#pragma once

#include <stdexcept>
#include <string>

namespace fermirot {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Raised when the middle product G [O,G] G matches neither closed-form case.
/// The case analysis proves only two outcomes exist, so hitting this means the
/// operator algebra itself is broken; callers should treat it as fatal.
class StructuralViolation : public Error {
  public:
    using Error::Error;
};

} // namespace fermirot
