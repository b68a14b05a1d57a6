#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "sevpr/common.hpp"
#include "sevpr/events.hpp"

namespace sevpr {

/// Per-pixel event counts over one time interval [t_start, t_end).
struct EventFrame {
    std::uint16_t width = 0;
    std::uint16_t height = 0;
    std::vector<std::uint32_t> counts;  // row-major, index v*width+u
    std::uint64_t t_start = 0;
    std::uint64_t t_end = 0;
    bool partial = false;  // trailing window not fully covered by data

    std::uint32_t at(std::uint16_t u, std::uint16_t v) const {
        return counts[grid_index(width, u, v)];
    }
    std::uint32_t& at(std::uint16_t u, std::uint16_t v) {
        return counts[grid_index(width, u, v)];
    }
    std::uint64_t total() const;
    std::uint64_t midpoint_us() const { return t_start + (t_end - t_start) / 2; }
};

struct AccumRegime {
    enum class Kind : std::uint8_t { fixed_time, fixed_count };
    Kind kind = Kind::fixed_time;
    std::uint64_t tau_us = 0;    // fixed_time window length
    std::uint64_t n_events = 0;  // fixed_count events per frame

    static AccumRegime fixed_time(std::uint64_t tau_us) {
        return {Kind::fixed_time, tau_us, 0};
    }
    static AccumRegime fixed_count(std::uint64_t n_events) {
        return {Kind::fixed_count, 0, n_events};
    }
};

struct FrameSeries {
    std::uint16_t width = 0;
    std::uint16_t height = 0;
    AccumRegime regime;
    std::vector<EventFrame> frames;
    /// fixed_count only: events in the trailing block of fewer than N.
    std::uint64_t remainder_dropped = 0;

    std::size_t size() const { return frames.size(); }
};

/// Frame k counts events with t in [t0 + k*tau, t0 + (k+1)*tau). Windows with
/// no events are emitted as all-zero frames so frame index maps affinely to
/// time. The trailing window is flagged partial unless the data runs to its
/// exact end. t0 defaults to the first event's timestamp and must not exceed it.
FrameSeries build_frames_fixed_time(const EventStream& stream, std::uint64_t tau_us);
FrameSeries build_frames_fixed_time(const EventStream& stream, std::uint64_t tau_us,
                                    std::uint64_t t0_us);

/// Consecutive blocks of exactly N events become one frame each; the trailing
/// block of fewer than N events is dropped and its size recorded.
FrameSeries build_frames_fixed_count(const EventStream& stream, std::uint64_t n_events);

/// Removes a trailing partial fixed-time frame, if present.
void drop_trailing_partial(FrameSeries& series);

/// Moves every count by (du, dv); counts shifted out of bounds are discarded
/// and vacated cells are zero. |du| < width, |dv| < height.
FrameSeries shift_pixels(const FrameSeries& series, int du, int dv);

/// True when both series have the same frame count and identical count grids
/// (timing metadata is not compared).
bool count_grids_equal(const FrameSeries& a, const FrameSeries& b);

/// Debug export: one "frame_idx,u,v,count" row per non-zero cell.
void export_frame_triplets(const FrameSeries& series, std::ostream& out);

}  // namespace sevpr
