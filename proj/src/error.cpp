#include "skewdiff/error.hpp"

namespace skewdiff {

std::string_view errc_name(Errc code) noexcept {
    switch (code) {
        case Errc::sigma_nonpositive: return "SigmaNonpositive";
        case Errc::delta_below_one: return "DeltaBelowOne";
        case Errc::b_negative: return "BNegative";
        case Errc::p_out_of_range: return "POutOfRange";
        case Errc::dsr_c_negative: return "DsrCNegative";
        case Errc::negative_curve: return "NegativeCurve";
        case Errc::non_integrable_derivative: return "NonIntegrableDerivative";
        case Errc::not_normalizable: return "NotNormalizable";
        case Errc::precondition: return "PreconditionViolated";
        case Errc::scheme_diverged: return "SchemeDiverged";
        case Errc::wrong_frame: return "WrongFrame";
        case Errc::b_zero: return "BZero";
        case Errc::missing_dsr_c: return "MissingDsrC";
        case Errc::frame_mismatch: return "FrameMismatch";
        case Errc::zero_local_time: return "ZeroLocalTime";
        case Errc::missing_draws: return "MissingDraws";
        case Errc::degenerate_weights: return "DegenerateWeights";
        case Errc::series_not_converged: return "SeriesNotConverged";
        case Errc::too_few_samples: return "TooFewSamples";
        case Errc::grid_too_coarse: return "GridTooCoarse";
        case Errc::unstable_solve: return "UnstableSolve";
        case Errc::config_invalid: return "ConfigInvalid";
        case Errc::unknown_kind: return "UnknownKind";
        case Errc::io: return "IoError";
    }
    return "Unknown";
}

}  // namespace skewdiff
