#ifndef DFSTOMO_ERRORS_HPP
#define DFSTOMO_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace dfstomo {

// Error taxonomy mirrored by the CLI exit codes (see tools/main.cpp):
//   ConfigError -> 2, IoError -> 3, CalibrationError -> 4, PhaseCoverageError -> 5.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CalibrationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct PhaseCoverageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Raised by phase assignment when no ramp is detectable; callers fall back
// to the phase-averaged (Abel) reconstruction path.
struct PhaseIndeterminateError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Truncated-basis computation lost more probability than allowed.
struct TruncationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace dfstomo

#endif
