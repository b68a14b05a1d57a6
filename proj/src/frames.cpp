#include "sevpr/frames.hpp"

#include <algorithm>
#include <ostream>

namespace sevpr {

namespace {

constexpr std::uint64_t kMaxFrames = 50'000'000;  // sanity guard against degenerate spans

EventFrame make_empty_frame(std::uint16_t width, std::uint16_t height,
                            std::uint64_t t_start, std::uint64_t t_end) {
    EventFrame frame;
    frame.width = width;
    frame.height = height;
    frame.counts.assign(static_cast<std::size_t>(width) * height, 0);
    frame.t_start = t_start;
    frame.t_end = t_end;
    return frame;
}

}  // namespace

std::uint64_t EventFrame::total() const {
    std::uint64_t sum = 0;
    for (std::uint32_t c : counts) sum += c;
    return sum;
}

FrameSeries build_frames_fixed_time(const EventStream& stream, std::uint64_t tau_us) {
    if (stream.empty()) throw Error(ErrorCode::empty_stream, "no events to accumulate");
    return build_frames_fixed_time(stream, tau_us, stream.events.front().t_us);
}

FrameSeries build_frames_fixed_time(const EventStream& stream, std::uint64_t tau_us,
                                    std::uint64_t t0_us) {
    if (tau_us == 0) throw Error(ErrorCode::invalid_argument, "tau must be positive");
    if (stream.empty()) throw Error(ErrorCode::empty_stream, "no events to accumulate");
    if (t0_us > stream.events.front().t_us)
        throw Error(ErrorCode::invalid_argument, "t0 is after the first event");

    const std::uint64_t t_last = stream.events.back().t_us;
    const std::uint64_t num_frames = (t_last - t0_us) / tau_us + 1;
    if (num_frames > kMaxFrames)
        throw Error(ErrorCode::invalid_argument, "window span would produce " +
                                                     std::to_string(num_frames) + " frames");

    FrameSeries series;
    series.width = stream.width;
    series.height = stream.height;
    series.regime = AccumRegime::fixed_time(tau_us);
    series.frames.reserve(num_frames);
    for (std::uint64_t k = 0; k < num_frames; ++k)
        series.frames.push_back(make_empty_frame(stream.width, stream.height,
                                                 t0_us + k * tau_us, t0_us + (k + 1) * tau_us));

    for (const Event& e : stream.events) {
        const std::uint64_t k = (e.t_us - t0_us) / tau_us;
        ++series.frames[k].at(e.u, e.v);
    }

    // The trailing window is complete only if the data runs to its exact end.
    series.frames.back().partial = series.frames.back().t_end != t_last + 1;
    return series;
}

FrameSeries build_frames_fixed_count(const EventStream& stream, std::uint64_t n_events) {
    if (n_events == 0) throw Error(ErrorCode::invalid_argument, "N must be positive");
    if (stream.empty()) throw Error(ErrorCode::empty_stream, "no events to accumulate");

    FrameSeries series;
    series.width = stream.width;
    series.height = stream.height;
    series.regime = AccumRegime::fixed_count(n_events);

    const std::size_t total = stream.events.size();
    const std::size_t num_frames = total / n_events;
    series.remainder_dropped = total % n_events;
    series.frames.reserve(num_frames);

    std::uint64_t block_start = total ? stream.events.front().t_us : 0;
    for (std::size_t k = 0; k < num_frames; ++k) {
        const std::size_t begin = k * n_events;
        const std::size_t end = begin + n_events;
        // Frames tile time contiguously: each ends where the next block begins.
        std::uint64_t block_end = end < total ? stream.events[end].t_us
                                              : stream.events.back().t_us + 1;
        block_end = std::max(block_end, block_start + 1);
        EventFrame frame = make_empty_frame(stream.width, stream.height, block_start, block_end);
        for (std::size_t i = begin; i < end; ++i)
            ++frame.at(stream.events[i].u, stream.events[i].v);
        series.frames.push_back(std::move(frame));
        block_start = block_end;
    }
    return series;
}

void drop_trailing_partial(FrameSeries& series) {
    if (!series.frames.empty() && series.frames.back().partial)
        series.frames.pop_back();
}

FrameSeries shift_pixels(const FrameSeries& series, int du, int dv) {
    const int width = series.width;
    const int height = series.height;
    // Offsets at or beyond the sensor size evict every count; experiment
    // configs reject such grids up front, but the operation itself is total.
    FrameSeries out;
    out.width = series.width;
    out.height = series.height;
    out.regime = series.regime;
    out.remainder_dropped = series.remainder_dropped;
    out.frames.reserve(series.frames.size());
    for (const EventFrame& frame : series.frames) {
        EventFrame shifted = make_empty_frame(series.width, series.height,
                                              frame.t_start, frame.t_end);
        shifted.partial = frame.partial;
        for (int v = 0; v < height; ++v) {
            const int tv = v + dv;
            if (tv < 0 || tv >= height) continue;
            for (int u = 0; u < width; ++u) {
                const int tu = u + du;
                if (tu < 0 || tu >= width) continue;
                shifted.counts[grid_index(series.width, std::uint16_t(tu), std::uint16_t(tv))] =
                    frame.counts[grid_index(series.width, std::uint16_t(u), std::uint16_t(v))];
            }
        }
        out.frames.push_back(std::move(shifted));
    }
    return out;
}

bool count_grids_equal(const FrameSeries& a, const FrameSeries& b) {
    if (a.width != b.width || a.height != b.height) return false;
    if (a.frames.size() != b.frames.size()) return false;
    for (std::size_t k = 0; k < a.frames.size(); ++k)
        if (a.frames[k].counts != b.frames[k].counts) return false;
    return true;
}

void export_frame_triplets(const FrameSeries& series, std::ostream& out) {
    out << "frame_idx,u,v,count\n";
    for (std::size_t k = 0; k < series.frames.size(); ++k) {
        const EventFrame& frame = series.frames[k];
        for (std::uint16_t v = 0; v < frame.height; ++v)
            for (std::uint16_t u = 0; u < frame.width; ++u)
                if (const std::uint32_t c = frame.at(u, v); c != 0)
                    out << k << ',' << u << ',' << v << ',' << c << '\n';
    }
}

}  // namespace sevpr
