#pragma once

#include <stdexcept>
#include <string>

namespace qfreq {

// Base for every error raised by the library. The CLI maps the concrete
// subclasses onto exit codes, so keep the hierarchy flat.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// An operation's precondition does not hold (bad amplitudes, N = 0, ...).
class PreconditionError : public Error {
public:
    using Error::Error;
};

// Operand shapes are incompatible (dimension mismatch, non-qubit factor).
class ShapeError : public PreconditionError {
public:
    using PreconditionError::PreconditionError;
};

// A result would exceed a configured size cap.
class CapacityError : public Error {
public:
    using Error::Error;
};

// Zero-norm state or density where a nonzero one is required.
class EmptyStateError : public PreconditionError {
public:
    using PreconditionError::PreconditionError;
};

// |a| in {0, 1} where a nondegenerate two-level spec is required.
class DegenerateSpecError : public PreconditionError {
public:
    using PreconditionError::PreconditionError;
};

// A label function produced a value outside its declared codomain.
class LabelError : public PreconditionError {
public:
    using PreconditionError::PreconditionError;
};

class UndefinedVisibilityError : public PreconditionError {
public:
    using PreconditionError::PreconditionError;
};

} // namespace qfreq
