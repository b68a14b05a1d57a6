#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace sevpr {

enum class ErrorCode {
    malformed_record,
    unsorted_input,
    out_of_bounds,
    empty_stream,
    too_few_frames,
    degenerate_variance,
    mass_exhausted,
    length_mismatch,
    geometry_mismatch,
    bad_sequence_length,
    track_coverage_gap,
    dimension_mismatch,
    invalid_argument,
    io_error,
    config_error,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

    /// Process exit code contract: config problems exit 2, data problems exit 3.
    int exit_code() const noexcept { return code_ == ErrorCode::config_error ? 2 : 3; }

private:
    ErrorCode code_;
};

const char* error_code_name(ErrorCode code);

struct Pixel {
    std::uint16_t u = 0;
    std::uint16_t v = 0;

    friend bool operator==(const Pixel&, const Pixel&) = default;
    friend auto operator<=>(const Pixel&, const Pixel&) = default;
};

/// Half-open pixel rectangle [u0,u1) x [v0,v1).
struct Rect {
    std::uint16_t u0 = 0, v0 = 0, u1 = 0, v1 = 0;

    bool contains(std::uint16_t u, std::uint16_t v) const {
        return u >= u0 && u < u1 && v >= v0 && v < v1;
    }
    bool empty() const { return u0 >= u1 || v0 >= v1; }
};

inline std::size_t grid_index(std::uint16_t width, std::uint16_t u, std::uint16_t v) {
    return static_cast<std::size_t>(v) * width + u;
}

}  // namespace sevpr
