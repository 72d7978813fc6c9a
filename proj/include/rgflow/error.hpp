#pragma once

#include <stdexcept>
#include <string>

namespace rgflow {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated (t <= 0, t outside [1,L], ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// A run configuration violates one of the hypotheses the flow relies on.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Truncation box or frequency grid too small for the requested tolerance.
class TailTooLarge : public Error {
public:
    using Error::Error;
};

/// Picard iteration diagnostics carried by solver failures.
struct PicardDiagnostics {
    int iterations = 0;
    double last_update = 0.0;  ///< block norm of the last iterate difference
    double block_norm = 0.0;   ///< block norm of the last iterate
};

class SolverError : public Error {
public:
    SolverError(const std::string& what, PicardDiagnostics diag)
        : Error(what), diagnostics_(diag) {}
    const PicardDiagnostics& diagnostics() const noexcept { return diagnostics_; }

private:
    PicardDiagnostics diagnostics_;
};

/// picard_max exceeded before the update dropped below picard_tol.
class NoConvergence : public SolverError {
public:
    using SolverError::SolverError;
};

/// The iterate left the guarded ball (block norm above norm_guard).
class Divergence : public SolverError {
public:
    using SolverError::SolverError;
};

/// f_n = A_n h_n + g_n or g^_n(0) = 0 no longer holds within tolerance.
class DecompositionDrift : public Error {
public:
    using Error::Error;
};

}  // namespace rgflow
