#pragma once

#include <cstdint>
#include <utility>

#include "sevpr/eval.hpp"
#include "sevpr/events.hpp"

namespace sevpr {

/// A synthetic single-route world with a planted ground truth. Scene activity
/// is defined per meter of travel, so the expected event count between two
/// route positions does not depend on traversal speed; only timestamps do.
/// Time-locked sensor noise (noise_hz) is the one speed-dependent term.
struct SynthWorld {
    std::uint16_t width = 100;
    std::uint16_t height = 80;
    double route_m = 120.0;
    double step_m = 0.25;       // route discretization for event generation
    double speed_mps = 1.0;     // nominal traversal speed at scale 1

    // Spatially smooth activity: Gaussian blobs that light up around a route
    // position. blob_amp is the blob's total event budget per meter at peak.
    int num_blobs = 40;
    double blob_amp = 25.0;
    double blob_sigma_px = 4.0;
    double blob_route_sigma_m = 6.0;

    // Single-pixel informative sites with strong variation along the route.
    int planted_pixels = 0;
    double planted_amp = 40.0;

    double background_epm = 0.02;  // events per meter per pixel, distance-locked
    double noise_hz = 0.0;         // events per second per pixel, time-locked

    std::uint64_t seed = 1;
};

/// Generates one traverse. speed_scale c compresses all timestamps by 1/c and
/// leaves the event sequence (order, coordinates, counts) untouched except
/// for time-locked noise; the pose track reflects the scaled speed.
/// traverse_id re-rolls the event realization (a repeated pass through the
/// same world) without touching the world layout. Output is reproducible
/// bit-for-bit from (world, speed_scale, traverse_id).
std::pair<EventStream, PoseTrack> synth_generate(const SynthWorld& world,
                                                 double speed_scale = 1.0,
                                                 std::uint64_t traverse_id = 0);

/// The pixels hosting planted informative sites, in generation order. Empty
/// when the world has none. Layout depends only on the world seed.
std::vector<Pixel> synth_planted_sites(const SynthWorld& world);

}  // namespace sevpr
