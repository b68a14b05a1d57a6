#include "sevpr/select.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>

#include "sevpr/rng.hpp"
#include "text_util.hpp"

namespace sevpr {

namespace {

// Shared by the parallel and serial variance kernels. Exact integer moment
// accumulation: variance = (K*sum_sq - sum^2) / K^2, no cancellation.
void variance_at_pixel(const FrameSeries& frames, std::size_t idx, double& var_out,
                       double& mean_out) {
    std::uint64_t sum = 0;
    unsigned __int128 sum_sq = 0;
    for (const EventFrame& frame : frames.frames) {
        const std::uint64_t c = frame.counts[idx];
        sum += c;
        sum_sq += static_cast<unsigned __int128>(c) * c;
    }
    const auto k = static_cast<std::uint64_t>(frames.frames.size());
    const unsigned __int128 numerator = k * sum_sq - static_cast<unsigned __int128>(sum) * sum;
    var_out = double(numerator) / (double(k) * double(k));
    mean_out = double(sum) / double(k);
}

VarianceMap variance_map_impl(const FrameSeries& frames, const PixelMask& mask,
                              bool parallel) {
    if (frames.frames.size() < 2)
        throw Error(ErrorCode::too_few_frames, "variance needs at least 2 frames");

    VarianceMap out;
    out.width = frames.width;
    out.height = frames.height;
    out.num_frames = frames.frames.size();
    const std::size_t n = static_cast<std::size_t>(frames.width) * frames.height;
    out.variance.assign(n, 0.0);
    out.mean.assign(n, 0.0);

    const auto total = static_cast<std::int64_t>(n);
    if (parallel) {
#pragma omp parallel for schedule(static)
        for (std::int64_t i = 0; i < total; ++i) {
            const auto u = static_cast<std::uint16_t>(i % frames.width);
            const auto v = static_cast<std::uint16_t>(i / frames.width);
            if (mask.is_masked(u, v)) continue;
            variance_at_pixel(frames, static_cast<std::size_t>(i), out.variance[i], out.mean[i]);
        }
    } else {
        for (std::int64_t i = 0; i < total; ++i) {
            const auto u = static_cast<std::uint16_t>(i % frames.width);
            const auto v = static_cast<std::uint16_t>(i / frames.width);
            if (mask.is_masked(u, v)) continue;
            variance_at_pixel(frames, static_cast<std::size_t>(i), out.variance[i], out.mean[i]);
        }
    }
    return out;
}

}  // namespace

VarianceMap variance_map(const FrameSeries& frames, const PixelMask& mask) {
    return variance_map_impl(frames, mask, true);
}

namespace serial {
VarianceMap variance_map(const FrameSeries& frames, const PixelMask& mask) {
    return variance_map_impl(frames, mask, false);
}
}  // namespace serial

SelectionPmf selection_pmf(const VarianceMap& varmap) {
    double total = 0.0;
    for (double s : varmap.variance) total += s;
    if (!(total > 0.0))
        throw Error(ErrorCode::degenerate_variance, "variance map is all zero");

    SelectionPmf pmf;
    pmf.width = varmap.width;
    pmf.height = varmap.height;
    pmf.p.resize(varmap.variance.size());
    for (std::size_t i = 0; i < pmf.p.size(); ++i) pmf.p[i] = varmap.variance[i] / total;
    return pmf;
}

double suppression_weight(int du, int dv, double sigma) {
    const double r_sq = double(du) * du + double(dv) * dv;
    return 1.0 - std::exp(-r_sq / (2.0 * sigma * sigma));
}

PixelSet select_pixels(const SelectionPmf& pmf, std::size_t j_count, double sigma,
                       std::uint64_t seed) {
    if (j_count == 0) throw Error(ErrorCode::invalid_argument, "J must be positive");
    if (!(sigma > 0.0)) throw Error(ErrorCode::invalid_argument, "sigma must be positive");

    const std::size_t n = pmf.p.size();
    std::vector<double> weight = pmf.p;
    double total = 0.0;
    for (double w : weight) total += w;

    Rng rng(seed);
    PixelSet out;
    out.seed = seed;
    out.sigma = sigma;
    out.pixels.reserve(j_count);

    for (std::size_t j = 0; j < j_count; ++j) {
        if (!(total > 0.0) || !std::isfinite(total))
            throw Error(ErrorCode::mass_exhausted,
                        "selection mass exhausted after " + std::to_string(j) + " draws");

        const double target = rng.uniform() * total;
        double acc = 0.0;
        std::size_t pick = n;
        std::size_t last_nonzero = n;
        for (std::size_t i = 0; i < n; ++i) {
            const double w = weight[i];
            if (w <= 0.0) continue;
            acc += w;
            last_nonzero = i;
            if (acc > target) {
                pick = i;
                break;
            }
        }
        if (pick == n) pick = last_nonzero;  // floating-point tail
        if (pick == n)
            throw Error(ErrorCode::mass_exhausted, "no pixel carries positive mass");

        const auto cu = static_cast<std::uint16_t>(pick % pmf.width);
        const auto cv = static_cast<std::uint16_t>(pick / pmf.width);
        out.pixels.push_back({cu, cv});

        // Fold the suppression kernel centered at the drawn pixel into the
        // working pmf; the center lands on exactly zero, so no replacement.
        total = 0.0;
        const double inv_two_sigma_sq = 1.0 / (2.0 * sigma * sigma);
        for (std::uint16_t v = 0; v < pmf.height; ++v) {
            const double dv = double(v) - double(cv);
            const std::size_t base = static_cast<std::size_t>(v) * pmf.width;
            for (std::uint16_t u = 0; u < pmf.width; ++u) {
                const double du = double(u) - double(cu);
                double& w = weight[base + u];
                if (w <= 0.0) continue;
                w *= 1.0 - std::exp(-(du * du + dv * dv) * inv_two_sigma_sq);
                total += w;
            }
        }
    }
    return out;
}

PixelSet select_random_pixels(std::uint16_t width, std::uint16_t height, std::size_t j_count,
                              std::uint64_t seed, const std::optional<Rect>& exclusion,
                              const PixelMask* mask) {
    std::vector<Pixel> allowed;
    allowed.reserve(static_cast<std::size_t>(width) * height);
    for (std::uint16_t v = 0; v < height; ++v)
        for (std::uint16_t u = 0; u < width; ++u) {
            if (exclusion && exclusion->contains(u, v)) continue;
            if (mask && mask->is_masked(u, v)) continue;
            allowed.push_back({u, v});
        }
    if (j_count > allowed.size())
        throw Error(ErrorCode::mass_exhausted,
                    "requested " + std::to_string(j_count) + " pixels from " +
                        std::to_string(allowed.size()) + " available");

    Rng rng(seed);
    PixelSet out;
    out.seed = seed;
    out.sigma = 0.0;
    out.pixels.reserve(j_count);
    // Partial Fisher-Yates: draw j_count prefix positions.
    for (std::size_t j = 0; j < j_count; ++j) {
        const std::size_t i = j + static_cast<std::size_t>(rng.below(allowed.size() - j));
        std::swap(allowed[j], allowed[i]);
        out.pixels.push_back(allowed[j]);
    }
    return out;
}

Rect bottom_third(std::uint16_t width, std::uint16_t height) {
    return Rect{0, static_cast<std::uint16_t>(2 * height / 3), width, height};
}

void save_pixel_set(const PixelSet& set, std::ostream& out) {
    out << "# J=" << set.pixels.size() << " sigma=" << set.sigma << " seed=" << set.seed << '\n';
    out << "u,v\n";
    for (const Pixel& p : set.pixels) out << p.u << ',' << p.v << '\n';
}

PixelSet load_pixel_set(std::istream& in) {
    PixelSet set;
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        const auto text = detail::trim(line);
        if (text.empty()) continue;
        if (text.front() == '#') {
            const auto sigma_pos = text.find("sigma=");
            const auto seed_pos = text.find("seed=");
            if (sigma_pos != std::string_view::npos) {
                double sigma;
                auto rest = text.substr(sigma_pos + 6);
                if (detail::parse_double(rest.substr(0, rest.find(' ')), sigma)) set.sigma = sigma;
            }
            if (seed_pos != std::string_view::npos) {
                std::uint64_t seed;
                auto rest = text.substr(seed_pos + 5);
                if (detail::parse_number(rest.substr(0, rest.find(' ')), seed)) set.seed = seed;
            }
            continue;
        }
        if (text.starts_with("u,")) continue;
        const auto fields = detail::split_fields(text);
        std::uint16_t u, v;
        if (fields.size() != 2 || !detail::parse_number(fields[0], u) ||
            !detail::parse_number(fields[1], v))
            throw Error(ErrorCode::malformed_record, "bad pixel row " + std::to_string(row));
        set.pixels.push_back({u, v});
    }
    return set;
}

void save_variance_map(const VarianceMap& varmap, std::ostream& out) {
    out << "u,v,S\n";
    for (std::uint16_t v = 0; v < varmap.height; ++v)
        for (std::uint16_t u = 0; u < varmap.width; ++u)
            out << u << ',' << v << ',' << varmap.var_at(u, v) << '\n';
}

}  // namespace sevpr
