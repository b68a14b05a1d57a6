#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "sevpr/common.hpp"
#include "sevpr/events.hpp"

namespace sevpr {

/// Pixels excluded from all downstream processing.
class PixelMask {
public:
    PixelMask() = default;
    PixelMask(std::uint16_t width, std::uint16_t height)
        : width_(width), height_(height),
          masked_(static_cast<std::size_t>(width) * height, 0) {}

    std::uint16_t width() const { return width_; }
    std::uint16_t height() const { return height_; }
    std::size_t count() const { return count_; }
    bool empty() const { return count_ == 0; }

    bool is_masked(std::uint16_t u, std::uint16_t v) const {
        if (masked_.empty()) return false;
        return masked_[grid_index(width_, u, v)] != 0;
    }

    void mask(std::uint16_t u, std::uint16_t v) {
        if (u >= width_ || v >= height_)
            throw Error(ErrorCode::out_of_bounds, "mask coordinate outside sensor bounds");
        auto& cell = masked_[grid_index(width_, u, v)];
        if (!cell) {
            cell = 1;
            ++count_;
        }
    }

    std::vector<Pixel> coords() const;

private:
    std::uint16_t width_ = 0;
    std::uint16_t height_ = 0;
    std::vector<std::uint8_t> masked_;
    std::size_t count_ = 0;
};

/// Masks every pixel whose total event count exceeds mean + k_sigma * std of
/// the per-pixel count distribution over the whole sensor (single pass,
/// zero-count pixels included). k_sigma may be +inf to disable.
PixelMask detect_hot_pixels(const EventStream& stream, double k_sigma);

/// Partitions time into bins of the given width (anchored at the first event)
/// and drops all events in bins whose count exceeds ratio times the median
/// non-zero bin count. bin_us > 0, ratio > 1.
EventStream remove_bursts(const EventStream& stream, std::uint64_t bin_us, double ratio);

/// Mask file format: header "u,v", one masked pixel per row.
void save_mask(const PixelMask& mask, std::ostream& out);
PixelMask load_mask(std::istream& in, std::uint16_t width, std::uint16_t height);

}  // namespace sevpr
