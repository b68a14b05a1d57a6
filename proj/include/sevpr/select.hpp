#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "sevpr/common.hpp"
#include "sevpr/frames.hpp"
#include "sevpr/preprocess.hpp"

namespace sevpr {

/// Per-pixel temporal statistics of event counts across the reference frames.
struct VarianceMap {
    std::uint16_t width = 0;
    std::uint16_t height = 0;
    std::vector<double> variance;  // population variance per pixel
    std::vector<double> mean;
    std::size_t num_frames = 0;

    double var_at(std::uint16_t u, std::uint16_t v) const {
        return variance[grid_index(width, u, v)];
    }
};

/// Probability mass function over pixels, proportional to temporal variance.
struct SelectionPmf {
    std::uint16_t width = 0;
    std::uint16_t height = 0;
    std::vector<double> p;  // sums to 1, masked pixels carry 0

    double at(std::uint16_t u, std::uint16_t v) const {
        return p[grid_index(width, u, v)];
    }
};

/// The selected pixel coordinates, in draw order.
struct PixelSet {
    std::vector<Pixel> pixels;
    std::uint64_t seed = 0;
    double sigma = 0.0;  // suppression width; 0 when not applicable

    std::size_t size() const { return pixels.size(); }
};

/// Population variance (and mean) of the per-pixel counts over >= 2 frames.
/// Masked pixels get variance and mean 0. Exact integer accumulation.
VarianceMap variance_map(const FrameSeries& frames, const PixelMask& mask);

/// p(u,v) = S(u,v) / sum(S). Errors if the variance map is all zero.
SelectionPmf selection_pmf(const VarianceMap& varmap);

/// Surround-suppression factor at offset (du, dv) from a selected pixel:
/// 1 - exp(-(du^2 + dv^2) / (2 sigma^2)). Exactly 0 at the center, tends to 1
/// with distance.
double suppression_weight(int du, int dv, double sigma);

/// Draws j_count pixels sequentially. After each draw the working pmf is
/// multiplied pointwise by the suppression factor centered at the drawn pixel
/// and renormalized, so the drawn pixel's mass becomes exactly zero and its
/// neighborhood is down-weighted. Deterministic given the seed.
PixelSet select_pixels(const SelectionPmf& pmf, std::size_t j_count, double sigma,
                       std::uint64_t seed);

/// Uniform sampling without replacement over the sensor, optionally skipping
/// an excluded rectangle and masked pixels.
PixelSet select_random_pixels(std::uint16_t width, std::uint16_t height,
                              std::size_t j_count, std::uint64_t seed,
                              const std::optional<Rect>& exclusion = std::nullopt,
                              const PixelMask* mask = nullptr);

/// The lower third of the sensor, as used by the location-prior baseline:
/// every pixel with v >= floor(2H/3).
Rect bottom_third(std::uint16_t width, std::uint16_t height);

/// PixelSet file format: comment header "# J=<n> sigma=<s> seed=<s>", then
/// "u,v" rows in draw order.
void save_pixel_set(const PixelSet& set, std::ostream& out);
PixelSet load_pixel_set(std::istream& in);

/// Flat "u,v,S" export of the variance grid.
void save_variance_map(const VarianceMap& varmap, std::ostream& out);

}  // namespace sevpr
