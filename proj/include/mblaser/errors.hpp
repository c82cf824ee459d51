#pragma once

#include <stdexcept>
#include <string>

namespace mblaser {

/// Base class of every error raised by the library.
class error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A parameter set or argument violates its documented invariants.
class invalid_parameter : public error {
public:
    using error::error;
};

/// Lambda scheme: no pump rate produces a positive stimulated-emission
/// steady state (saturation parameter at or above its maximal value).
class no_lasing : public error {
public:
    using error::error;
};

/// V scheme: the pump window (p_thr, p_max) is empty.
class empty_window : public error {
public:
    using error::error;
};

/// The step-size controller could not meet the requested tolerance.
class step_size_underflow : public error {
public:
    using error::error;
};

/// The integrated state left the finite range.
class non_finite : public error {
public:
    using error::error;
};

/// t_end was reached before the trailing-window convergence test held.
class no_convergence : public error {
public:
    using error::error;
};

} // namespace mblaser
