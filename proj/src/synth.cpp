#include "sevpr/synth.hpp"

#include <algorithm>
#include <cmath>

#include "sevpr/rng.hpp"

namespace sevpr {

namespace {

constexpr std::uint64_t kSignalSalt = 0x5e7ec7a9b1d30f4bULL;
constexpr std::uint64_t kNoiseSalt = 0x9d2c5680f1a3c6e7ULL;

struct RouteBump {
    double center_m = 0.0;
    double sigma_m = 1.0;
    double amp = 0.0;  // events per meter at peak
};

struct Blob {
    std::uint16_t cu = 0, cv = 0;
    double sigma_px = 1.0;
    RouteBump bump;
};

struct PlantedSite {
    Pixel pixel;
    RouteBump bumps[3];
};

struct WorldLayout {
    std::vector<Blob> blobs;
    std::vector<PlantedSite> planted;
};

// Layout depends only on the world seed; the same draws happen regardless of
// traversal speed.
WorldLayout build_layout(const SynthWorld& world) {
    Rng rng(world.seed);
    WorldLayout layout;
    layout.blobs.reserve(world.num_blobs);
    for (int b = 0; b < world.num_blobs; ++b) {
        Blob blob;
        blob.cu = static_cast<std::uint16_t>(rng.below(world.width));
        blob.cv = static_cast<std::uint16_t>(rng.below(world.height));
        blob.sigma_px = world.blob_sigma_px * rng.uniform_range(0.6, 1.5);
        blob.bump.center_m = rng.uniform_range(0.0, world.route_m);
        blob.bump.sigma_m = world.blob_route_sigma_m * rng.uniform_range(0.6, 1.5);
        blob.bump.amp = world.blob_amp * rng.uniform_range(0.5, 1.5);
        layout.blobs.push_back(blob);
    }

    // Planted informative sites keep a mutual distance so surround
    // suppression cannot collapse them into one draw.
    const double min_dist = std::max<double>(8.0, std::min(world.width, world.height) / 5.0);
    layout.planted.reserve(world.planted_pixels);
    for (int p = 0; p < world.planted_pixels; ++p) {
        PlantedSite site;
        for (int attempt = 0; attempt < 1000; ++attempt) {
            site.pixel = {static_cast<std::uint16_t>(rng.below(world.width)),
                          static_cast<std::uint16_t>(rng.below(world.height))};
            bool ok = true;
            for (const PlantedSite& other : layout.planted) {
                const double du = double(site.pixel.u) - other.pixel.u;
                const double dv = double(site.pixel.v) - other.pixel.v;
                if (std::sqrt(du * du + dv * dv) < min_dist) {
                    ok = false;
                    break;
                }
            }
            if (ok) break;
        }
        for (RouteBump& bump : site.bumps) {
            bump.center_m = rng.uniform_range(0.0, world.route_m);
            bump.sigma_m = rng.uniform_range(world.route_m / 25.0, world.route_m / 10.0);
            bump.amp = world.planted_amp * rng.uniform_range(0.7, 1.3);
        }
        layout.planted.push_back(site);
    }
    return layout;
}

double bump_weight(const RouteBump& bump, double s_m) {
    const double z = (s_m - bump.center_m) / bump.sigma_m;
    return std::exp(-0.5 * z * z);
}

struct PendingEvent {
    double frac;      // position inside the step, scale-independent
    std::uint32_t order;  // generation sequence, breaks frac ties
    std::uint16_t u, v;
    std::int8_t p;
};

}  // namespace

std::vector<Pixel> synth_planted_sites(const SynthWorld& world) {
    std::vector<Pixel> out;
    for (const PlantedSite& site : build_layout(world).planted) out.push_back(site.pixel);
    return out;
}

std::pair<EventStream, PoseTrack> synth_generate(const SynthWorld& world, double speed_scale,
                                                 std::uint64_t traverse_id) {
    if (world.width == 0 || world.height == 0)
        throw Error(ErrorCode::invalid_argument, "world sensor geometry must be positive");
    if (!(world.route_m > 0.0) || !(world.step_m > 0.0) || !(world.speed_mps > 0.0))
        throw Error(ErrorCode::invalid_argument, "route, step and speed must be positive");
    if (!(speed_scale > 0.0))
        throw Error(ErrorCode::invalid_argument, "speed scale must be positive");
    if (world.step_m / (world.speed_mps * speed_scale) < 2e-6)
        throw Error(ErrorCode::invalid_argument,
                    "route step shorter than 2us of travel; timestamps would collide");

    const WorldLayout layout = build_layout(world);
    const std::uint64_t traverse_mix = traverse_id * 0xbf58476d1ce4e5b9ULL;
    Rng signal(world.seed ^ kSignalSalt ^ traverse_mix);
    Rng noise(world.seed ^ kNoiseSalt ^ traverse_mix);

    const double speed = world.speed_mps * speed_scale;
    const std::size_t num_pixels = static_cast<std::size_t>(world.width) * world.height;

    EventStream stream;
    stream.width = world.width;
    stream.height = world.height;

    PoseTrack track;
    track.samples.push_back({0, 0.0, 0.0});

    std::vector<PendingEvent> step_events;
    const auto num_steps =
        static_cast<std::size_t>(std::ceil(world.route_m / world.step_m));
    double t_start_us = 0.0;
    for (std::size_t step = 0; step < num_steps; ++step) {
        const double s = double(step) * world.step_m;
        const double step_len = std::min(world.step_m, world.route_m - s);
        const double s_mid = s + 0.5 * step_len;
        const double dt_us = step_len / speed * 1e6;
        step_events.clear();

        auto push = [&](Rng& rng, std::uint16_t u, std::uint16_t v) {
            PendingEvent e;
            e.frac = rng.uniform();
            e.order = static_cast<std::uint32_t>(step_events.size());
            e.u = u;
            e.v = v;
            e.p = (rng.next() & 1) ? std::int8_t(1) : std::int8_t(-1);
            step_events.push_back(e);
        };

        // Distance-locked background, uniform over the sensor.
        const std::uint64_t bg = signal.poisson(world.background_epm * step_len * double(num_pixels));
        for (std::uint64_t i = 0; i < bg; ++i) {
            const std::size_t idx = static_cast<std::size_t>(signal.below(num_pixels));
            push(signal, static_cast<std::uint16_t>(idx % world.width),
                 static_cast<std::uint16_t>(idx / world.width));
        }

        // Blob activity: a Gaussian cloud of events around the blob center
        // while the route position is inside the blob's bump.
        for (const Blob& blob : layout.blobs) {
            const double w = bump_weight(blob.bump, s_mid);
            if (w < 1e-6) continue;
            const std::uint64_t n = signal.poisson(blob.bump.amp * w * step_len);
            for (std::uint64_t i = 0; i < n; ++i) {
                int u = -1, v = -1;
                for (int attempt = 0; attempt < 64; ++attempt) {
                    u = int(blob.cu) + int(std::lround(signal.normal() * blob.sigma_px));
                    v = int(blob.cv) + int(std::lround(signal.normal() * blob.sigma_px));
                    if (u >= 0 && u < world.width && v >= 0 && v < world.height) break;
                    u = -1;
                }
                if (u < 0) {
                    u = blob.cu;
                    v = blob.cv;
                }
                push(signal, static_cast<std::uint16_t>(u), static_cast<std::uint16_t>(v));
            }
        }

        // Planted single-pixel sites.
        for (const PlantedSite& site : layout.planted) {
            double rate = 0.0;
            for (const RouteBump& bump : site.bumps) rate += bump.amp * bump_weight(bump, s_mid);
            const std::uint64_t n = signal.poisson(rate * step_len);
            for (std::uint64_t i = 0; i < n; ++i) push(signal, site.pixel.u, site.pixel.v);
        }

        // Time-locked sensor noise; drawn from a separate RNG so the signal
        // sequence above is identical across speed scales.
        if (world.noise_hz > 0.0) {
            const std::uint64_t n =
                noise.poisson(world.noise_hz * double(num_pixels) * dt_us * 1e-6);
            for (std::uint64_t i = 0; i < n; ++i) {
                const std::size_t idx = static_cast<std::size_t>(noise.below(num_pixels));
                push(noise, static_cast<std::uint16_t>(idx % world.width),
                     static_cast<std::uint16_t>(idx / world.width));
            }
        }

        std::sort(step_events.begin(), step_events.end(),
                  [](const PendingEvent& a, const PendingEvent& b) {
                      return a.frac != b.frac ? a.frac < b.frac : a.order < b.order;
                  });
        for (const PendingEvent& e : step_events)
            stream.events.push_back({static_cast<std::uint64_t>(t_start_us + e.frac * dt_us),
                                     e.u, e.v, e.p});

        t_start_us += dt_us;
        track.samples.push_back({static_cast<std::uint64_t>(t_start_us), s + step_len, 0.0});
    }
    return {std::move(stream), std::move(track)};
}

}  // namespace sevpr
