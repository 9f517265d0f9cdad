#pragma once

#include <stdexcept>
#include <string>

namespace maxreg {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A precondition on the arguments was violated (bad exponent, dimension
/// mismatch, non-SPD Gram matrix, ...).
class InvalidInput : public Error {
public:
    using Error::Error;
};

/// A numerical procedure failed to deliver its postcondition (singular
/// system, iteration cap, ill-conditioned eigenbasis).
class NumericalFailure : public Error {
public:
    using Error::Error;
};

/// The configured power-law modulus violates the integrability condition
/// int_0^tau omega(t) / t^{1+gamma/2} dt < infinity.
class DiniViolation : public InvalidInput {
public:
    using InvalidInput::InvalidInput;
};

/// Malformed configuration document.
class ConfigError : public Error {
public:
    using Error::Error;
};

} // namespace maxreg
