#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace skewdiff {

enum class Errc : std::uint8_t {
    sigma_nonpositive,
    delta_below_one,
    b_negative,
    p_out_of_range,
    dsr_c_negative,
    negative_curve,
    non_integrable_derivative,
    not_normalizable,
    precondition,
    scheme_diverged,
    wrong_frame,
    b_zero,
    missing_dsr_c,
    frame_mismatch,
    zero_local_time,
    missing_draws,
    degenerate_weights,
    series_not_converged,
    too_few_samples,
    grid_too_coarse,
    unstable_solve,
    config_invalid,
    unknown_kind,
    io,
};

std::string_view errc_name(Errc code) noexcept;

/// The single exception type thrown by the library. `code()` identifies the
/// failure; `what()` carries the human-readable reason.
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

/// Thrown when a path step produces NaN or overflows.
class SchemeDiverged : public Error {
public:
    SchemeDiverged(std::size_t step, const std::string& message)
        : Error(Errc::scheme_diverged, message), step_(step) {}

    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

[[noreturn]] inline void fail(Errc code, const std::string& message) {
    throw Error(code, message);
}

inline void require(bool condition, Errc code, const std::string& message) {
    if (!condition) fail(code, message);
}

}  // namespace skewdiff
