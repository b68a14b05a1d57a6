#include "sevpr/events.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>

#include "sevpr/preprocess.hpp"
#include "text_util.hpp"

namespace sevpr {

namespace {

constexpr char kMagic[4] = {'E', 'V', 'S', 'T'};
constexpr std::size_t kRecordBytes = 13;

void check_event_bounds(std::uint16_t u, std::uint16_t v, const ParseOptions& options,
                        std::size_t row) {
    if (u >= options.width || v >= options.height)
        throw Error(ErrorCode::out_of_bounds,
                    "event coordinate (" + std::to_string(u) + "," + std::to_string(v) +
                        ") outside " + std::to_string(options.width) + "x" +
                        std::to_string(options.height) + " at record " + std::to_string(row));
}

void check_order(std::uint64_t t, std::uint64_t max_t, const ParseOptions& options,
                 std::size_t row, bool& needs_sort) {
    if (t >= max_t) return;
    if (max_t - t > options.sort_slack_us)
        throw Error(ErrorCode::unsorted_input,
                    "timestamp regressed by " + std::to_string(max_t - t) +
                        "us at record " + std::to_string(row));
    needs_sort = true;
}

void finalize(EventStream& stream, bool needs_sort, ParseStats* stats) {
    if (needs_sort) {
        std::stable_sort(stream.events.begin(), stream.events.end(),
                         [](const Event& a, const Event& b) { return a.t_us < b.t_us; });
    }
    if (stats) stats->resorted = needs_sort;
}

std::int8_t map_polarity(long long raw, std::size_t row, ParseStats* stats) {
    if (raw == 1 || raw == -1) return static_cast<std::int8_t>(raw);
    if (raw == 0) {
        // {0,1} encodings are common; 0 means a negative change.
        if (stats) ++stats->zero_polarity_mapped;
        return -1;
    }
    throw Error(ErrorCode::malformed_record,
                "polarity " + std::to_string(raw) + " at record " + std::to_string(row));
}

}  // namespace

EventStream parse_events_csv(std::istream& in, const ParseOptions& options,
                             ParseStats* stats) {
    EventStream stream;
    stream.width = options.width;
    stream.height = options.height;

    std::string line;
    std::size_t row = 0;
    std::uint64_t max_t = 0;
    bool needs_sort = false;
    bool first_content_line = true;

    while (std::getline(in, line)) {
        ++row;
        const auto text = detail::trim(line);
        if (text.empty() || text.front() == '#') continue;
        if (first_content_line) {
            first_content_line = false;
            if (text.starts_with("t_us")) continue;  // header
        }
        const auto fields = detail::split_fields(text);
        if (fields.size() != 4)
            throw Error(ErrorCode::malformed_record,
                        "expected 4 fields, got " + std::to_string(fields.size()) +
                            " at line " + std::to_string(row));
        std::uint64_t t;
        std::uint16_t u, v;
        long long p_raw;
        if (!detail::parse_number(fields[0], t) || !detail::parse_number(fields[1], u) ||
            !detail::parse_number(fields[2], v) || !detail::parse_number(fields[3], p_raw))
            throw Error(ErrorCode::malformed_record, "unparsable field at line " + std::to_string(row));

        check_event_bounds(u, v, options, row);
        check_order(t, max_t, options, row, needs_sort);
        max_t = std::max(max_t, t);
        stream.events.push_back({t, u, v, map_polarity(p_raw, row, stats)});
        if (stats) ++stats->rows;
    }
    finalize(stream, needs_sort, stats);
    return stream;
}

void write_events_csv(const EventStream& stream, std::ostream& out) {
    out << "t_us,u,v,p\n";
    for (const Event& e : stream.events)
        out << e.t_us << ',' << e.u << ',' << e.v << ',' << int(e.p) << '\n';
}

EventStream parse_events_binary(std::istream& in, const ParseOptions& options,
                                ParseStats* stats) {
    char header[16];
    in.read(header, sizeof header);
    if (in.gcount() != sizeof header || std::memcmp(header, kMagic, 4) != 0)
        throw Error(ErrorCode::malformed_record, "missing EVST header");

    ParseOptions effective = options;
    std::memcpy(&effective.width, header + 4, 2);
    std::memcpy(&effective.height, header + 6, 2);
    if (effective.width == 0 || effective.height == 0)
        throw Error(ErrorCode::malformed_record, "zero sensor geometry in EVST header");

    EventStream stream;
    stream.width = effective.width;
    stream.height = effective.height;

    char record[kRecordBytes];
    std::size_t row = 0;
    std::uint64_t max_t = 0;
    bool needs_sort = false;
    while (in.read(record, kRecordBytes)) {
        ++row;
        Event e;
        std::memcpy(&e.t_us, record, 8);
        std::memcpy(&e.u, record + 8, 2);
        std::memcpy(&e.v, record + 10, 2);
        std::int8_t p;
        std::memcpy(&p, record + 12, 1);
        e.p = map_polarity(p, row, stats);
        check_event_bounds(e.u, e.v, effective, row);
        check_order(e.t_us, max_t, effective, row, needs_sort);
        max_t = std::max(max_t, e.t_us);
        stream.events.push_back(e);
        if (stats) ++stats->rows;
    }
    if (in.gcount() != 0)
        throw Error(ErrorCode::malformed_record, "truncated record at end of stream");
    finalize(stream, needs_sort, stats);
    return stream;
}

void write_events_binary(const EventStream& stream, std::ostream& out) {
    char header[16] = {};
    std::memcpy(header, kMagic, 4);
    std::memcpy(header + 4, &stream.width, 2);
    std::memcpy(header + 6, &stream.height, 2);
    out.write(header, sizeof header);

    char record[kRecordBytes];
    for (const Event& e : stream.events) {
        std::memcpy(record, &e.t_us, 8);
        std::memcpy(record + 8, &e.u, 2);
        std::memcpy(record + 10, &e.v, 2);
        std::memcpy(record + 12, &e.p, 1);
        out.write(record, kRecordBytes);
    }
}

EventStream load_events(const std::string& path, FormatTag format,
                        const ParseOptions& options, ParseStats* stats) {
    auto in = detail::open_input(path, format == FormatTag::binary);
    return format == FormatTag::csv ? parse_events_csv(in, options, stats)
                                    : parse_events_binary(in, options, stats);
}

void save_events(const EventStream& stream, const std::string& path, FormatTag format) {
    auto out = detail::open_output(path, format == FormatTag::binary);
    if (format == FormatTag::csv)
        write_events_csv(stream, out);
    else
        write_events_binary(stream, out);
}

FormatTag format_from_extension(const std::string& path) {
    const auto dot = path.rfind('.');
    const std::string ext = dot == std::string::npos ? "" : path.substr(dot);
    if (ext == ".csv") return FormatTag::csv;
    if (ext == ".evst" || ext == ".bin") return FormatTag::binary;
    throw Error(ErrorCode::config_error, "cannot infer event format from '" + path + "'");
}

std::pair<EventStream, EventStream> split_polarity(const EventStream& stream) {
    EventStream pos{stream.width, stream.height, {}};
    EventStream neg{stream.width, stream.height, {}};
    for (const Event& e : stream.events)
        (e.p > 0 ? pos : neg).events.push_back(e);
    return {std::move(pos), std::move(neg)};
}

EventStream filter_masked_events(const EventStream& stream, const PixelMask& mask) {
    if (mask.empty()) return stream;
    EventStream out{stream.width, stream.height, {}};
    out.events.reserve(stream.events.size());
    for (const Event& e : stream.events)
        if (!mask.is_masked(e.u, e.v)) out.events.push_back(e);
    return out;
}

EventStream compress_timestamps(const EventStream& stream, double factor) {
    if (!(factor > 0.0))
        throw Error(ErrorCode::invalid_argument, "timestamp compression factor must be > 0");
    EventStream out = stream;
    for (Event& e : out.events)
        e.t_us = static_cast<std::uint64_t>(std::floor(static_cast<double>(e.t_us) / factor));
    return out;
}

}  // namespace sevpr
