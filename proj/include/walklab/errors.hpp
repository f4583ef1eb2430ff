#pragma once

#include <stdexcept>
#include <string>

namespace walklab {

// Exit codes used by the CLI: 0 success, 2 a verified contract was violated,
// 3 a resource cap was exceeded, 4 bad usage.
enum class ExitCode : int {
    ok = 0,
    verification_failure = 2,
    resource_overflow = 3,
    usage = 4,
};

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A size/budget cap was hit (ball enumeration, measure support, ...).
struct OverflowError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A quantitative contract that should hold was observed to fail.
struct VerificationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Search/calibration exhausted its budget without an answer.
struct SearchFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline ExitCode exit_code_for(const std::exception& e) {
    if (dynamic_cast<const UsageError*>(&e)) return ExitCode::usage;
    if (dynamic_cast<const OverflowError*>(&e)) return ExitCode::resource_overflow;
    if (dynamic_cast<const VerificationError*>(&e)) return ExitCode::verification_failure;
    if (dynamic_cast<const SearchFailure*>(&e)) return ExitCode::resource_overflow;
    return ExitCode::usage;
}

}  // namespace walklab
