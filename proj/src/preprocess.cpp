#include "sevpr/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>

#include "text_util.hpp"

namespace sevpr {

std::vector<Pixel> PixelMask::coords() const {
    std::vector<Pixel> out;
    out.reserve(count_);
    for (std::uint16_t v = 0; v < height_; ++v)
        for (std::uint16_t u = 0; u < width_; ++u)
            if (masked_[grid_index(width_, u, v)]) out.push_back({u, v});
    return out;
}

PixelMask detect_hot_pixels(const EventStream& stream, double k_sigma) {
    if (stream.empty()) throw Error(ErrorCode::empty_stream, "no events for hot-pixel statistics");
    if (!(k_sigma > 0.0)) throw Error(ErrorCode::invalid_argument, "k_sigma must be positive");

    const std::size_t n = stream.num_pixels();
    std::vector<std::uint64_t> per_pixel(n, 0);
    for (const Event& e : stream.events) ++per_pixel[grid_index(stream.width, e.u, e.v)];

    std::uint64_t sum = 0;
    double sum_sq = 0.0;
    for (std::uint64_t c : per_pixel) {
        sum += c;
        sum_sq += double(c) * double(c);
    }
    const double mean = double(sum) / double(n);
    const double var = std::max(0.0, sum_sq / double(n) - mean * mean);
    const double threshold = mean + k_sigma * std::sqrt(var);

    PixelMask mask(stream.width, stream.height);
    if (std::isinf(threshold)) return mask;
    for (std::uint16_t v = 0; v < stream.height; ++v)
        for (std::uint16_t u = 0; u < stream.width; ++u)
            if (double(per_pixel[grid_index(stream.width, u, v)]) > threshold) mask.mask(u, v);
    return mask;
}

EventStream remove_bursts(const EventStream& stream, std::uint64_t bin_us, double ratio) {
    if (stream.empty()) throw Error(ErrorCode::empty_stream, "no events for burst removal");
    if (bin_us == 0) throw Error(ErrorCode::invalid_argument, "bin width must be positive");
    if (!(ratio > 1.0)) throw Error(ErrorCode::invalid_argument, "burst ratio must exceed 1");

    const std::uint64_t t0 = stream.events.front().t_us;
    const std::uint64_t num_bins = (stream.events.back().t_us - t0) / bin_us + 1;
    std::vector<std::uint64_t> bin_count(num_bins, 0);
    for (const Event& e : stream.events) ++bin_count[(e.t_us - t0) / bin_us];

    std::vector<std::uint64_t> nonzero;
    nonzero.reserve(bin_count.size());
    for (std::uint64_t c : bin_count)
        if (c > 0) nonzero.push_back(c);
    std::sort(nonzero.begin(), nonzero.end());
    const double median = nonzero.size() % 2 == 1
                              ? double(nonzero[nonzero.size() / 2])
                              : 0.5 * (double(nonzero[nonzero.size() / 2 - 1]) +
                                       double(nonzero[nonzero.size() / 2]));
    const double threshold = ratio * median;

    EventStream out{stream.width, stream.height, {}};
    out.events.reserve(stream.events.size());
    for (const Event& e : stream.events)
        if (double(bin_count[(e.t_us - t0) / bin_us]) <= threshold) out.events.push_back(e);
    return out;
}

void save_mask(const PixelMask& mask, std::ostream& out) {
    out << "u,v\n";
    for (const Pixel& p : mask.coords()) out << p.u << ',' << p.v << '\n';
}

PixelMask load_mask(std::istream& in, std::uint16_t width, std::uint16_t height) {
    PixelMask mask(width, height);
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        const auto text = detail::trim(line);
        if (text.empty() || text.front() == '#' || text.starts_with("u,")) continue;
        const auto fields = detail::split_fields(text);
        std::uint16_t u, v;
        if (fields.size() != 2 || !detail::parse_number(fields[0], u) ||
            !detail::parse_number(fields[1], v))
            throw Error(ErrorCode::malformed_record, "bad mask row " + std::to_string(row));
        mask.mask(u, v);
    }
    return mask;
}

}  // namespace sevpr
