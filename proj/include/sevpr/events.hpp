#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "sevpr/common.hpp"

namespace sevpr {

/// One brightness-change record: time in integer microseconds, pixel
/// coordinates, polarity of the change (+1 or -1).
struct Event {
    std::uint64_t t_us = 0;
    std::uint16_t u = 0;
    std::uint16_t v = 0;
    std::int8_t p = 1;

    friend bool operator==(const Event&, const Event&) = default;
};

struct EventStream {
    std::uint16_t width = 346;
    std::uint16_t height = 260;
    std::vector<Event> events;  // non-decreasing in t_us

    bool empty() const { return events.empty(); }
    std::size_t size() const { return events.size(); }
    std::size_t num_pixels() const {
        return static_cast<std::size_t>(width) * height;
    }
    std::uint64_t duration_us() const {
        return events.empty() ? 0 : events.back().t_us - events.front().t_us;
    }
};

enum class FormatTag { csv, binary };

struct ParseOptions {
    std::uint16_t width = 346;
    std::uint16_t height = 260;
    /// Timestamps may regress by at most this much; inversions within the
    /// slack are re-sorted, larger ones are rejected.
    std::uint64_t sort_slack_us = 0;
};

struct ParseStats {
    std::size_t rows = 0;
    std::size_t zero_polarity_mapped = 0;  // p=0 inputs mapped to -1
    bool resorted = false;
};

/// Text format: optional header "t_us,u,v,p", then one event per row.
EventStream parse_events_csv(std::istream& in, const ParseOptions& options,
                             ParseStats* stats = nullptr);
void write_events_csv(const EventStream& stream, std::ostream& out);

/// Binary format: 16-byte header (magic "EVST", u16 width, u16 height,
/// 8 reserved bytes), then packed 13-byte little-endian records
/// (u64 t_us, u16 u, u16 v, i8 p).
EventStream parse_events_binary(std::istream& in, const ParseOptions& options,
                                ParseStats* stats = nullptr);
void write_events_binary(const EventStream& stream, std::ostream& out);

EventStream load_events(const std::string& path, FormatTag format,
                        const ParseOptions& options, ParseStats* stats = nullptr);
void save_events(const EventStream& stream, const std::string& path, FormatTag format);

/// Picks csv for ".csv", binary for ".evst"/".bin"; anything else is an error.
FormatTag format_from_extension(const std::string& path);

/// Splits by polarity into (positive, negative); order preserved in both.
std::pair<EventStream, EventStream> split_polarity(const EventStream& stream);

class PixelMask;  // preprocess.hpp

/// Drops every event that lands on a masked pixel; order preserved.
EventStream filter_masked_events(const EventStream& stream, const PixelMask& mask);

/// Remaps all timestamps through t -> t / factor (factor > 0), keeping event
/// order and coordinates. Used to emulate a traverse at a different speed.
EventStream compress_timestamps(const EventStream& stream, double factor);

}  // namespace sevpr
