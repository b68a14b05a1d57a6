#include "sevpr/common.hpp"

namespace sevpr {

const char* error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::malformed_record: return "malformed_record";
        case ErrorCode::unsorted_input: return "unsorted_input";
        case ErrorCode::out_of_bounds: return "out_of_bounds";
        case ErrorCode::empty_stream: return "empty_stream";
        case ErrorCode::too_few_frames: return "too_few_frames";
        case ErrorCode::degenerate_variance: return "degenerate_variance";
        case ErrorCode::mass_exhausted: return "mass_exhausted";
        case ErrorCode::length_mismatch: return "length_mismatch";
        case ErrorCode::geometry_mismatch: return "geometry_mismatch";
        case ErrorCode::bad_sequence_length: return "bad_sequence_length";
        case ErrorCode::track_coverage_gap: return "track_coverage_gap";
        case ErrorCode::dimension_mismatch: return "dimension_mismatch";
        case ErrorCode::invalid_argument: return "invalid_argument";
        case ErrorCode::io_error: return "io_error";
        case ErrorCode::config_error: return "config_error";
    }
    return "unknown";
}

}  // namespace sevpr
