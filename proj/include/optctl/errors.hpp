#pragma once

#include <stdexcept>
#include <string>

namespace optctl {

// Base class for every failure this library reports deliberately.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// A pivot fell below the scale-invariant threshold; the matrix is
// numerically singular for the requested solve.
struct SingularMatrix : Error {
    explicit SingularMatrix(const std::string& what) : Error(what) {}
};

// Power iteration failed to stabilize on every restart.
struct NoConvergence : Error {
    explicit NoConvergence(const std::string& what) : Error(what) {}
};

// An oracle callback produced NaN or Inf.
struct NonFiniteValue : Error {
    explicit NonFiniteValue(const std::string& what) : Error(what) {}
};

// Every coordinate of a backward-difference pair moved less than the guard.
struct AllColumnsDegenerate : Error {
    explicit AllColumnsDegenerate(const std::string& what) : Error(what) {}
};

// A finite-horizon stepper was asked for an iteration past its terminal time.
struct HorizonExceeded : Error {
    explicit HorizonExceeded(const std::string& what) : Error(what) {}
};

// A brute-force routine was asked for more than desk scale.
struct TooLarge : Error {
    explicit TooLarge(const std::string& what) : Error(what) {}
};

// Structured-text input could not be parsed at all.
struct ParseError : Error {
    explicit ParseError(const std::string& what) : Error(what) {}
};

// Parsed input violates the documented schema or a parameter constraint.
struct ValidationError : Error {
    explicit ValidationError(const std::string& what) : Error(what) {}
};

// Operands of a linear-algebra operation have incompatible dimensions.
struct ShapeMismatch : Error {
    explicit ShapeMismatch(const std::string& what) : Error(what) {}
};

}  // namespace optctl
