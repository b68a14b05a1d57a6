// Compares the OpenMP kernels against their serial reference implementations
// on identical inputs: wall time per kernel plus an exact equality check.

#include <chrono>
#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "sevpr/match.hpp"
#include "sevpr/rng.hpp"
#include "sevpr/select.hpp"
#include "sevpr/serial.hpp"

namespace {

using Clock = std::chrono::steady_clock;

sevpr::FrameSeries random_series(std::uint16_t width, std::uint16_t height, std::size_t count,
                                 sevpr::Rng& rng) {
    sevpr::FrameSeries series;
    series.width = width;
    series.height = height;
    series.regime = sevpr::AccumRegime::fixed_time(1000000);
    series.frames.resize(count);
    for (std::size_t k = 0; k < count; ++k) {
        auto& frame = series.frames[k];
        frame.width = width;
        frame.height = height;
        frame.t_start = k * 1000000ull;
        frame.t_end = (k + 1) * 1000000ull;
        frame.counts.resize(std::size_t(width) * height);
        for (std::uint32_t& c : frame.counts) c = std::uint32_t(rng.below(64));
    }
    return series;
}

template <typename F>
double best_of(int reps, F&& fn) {
    double best = 1e300;
    for (int i = 0; i < reps; ++i) {
        const auto t0 = Clock::now();
        fn();
        const auto t1 = Clock::now();
        best = std::min(best, std::chrono::duration<double, std::milli>(t1 - t0).count());
    }
    return best;
}

void report(const char* name, double serial_ms, double parallel_ms, bool equal) {
    std::printf("%-22s serial %9.3f ms   openmp %9.3f ms   speedup %5.2fx   %s\n", name,
                serial_ms, parallel_ms, parallel_ms > 0 ? serial_ms / parallel_ms : 0.0,
                equal ? "results equal" : "RESULTS DIFFER");
}

}  // namespace

int main(int argc, char** argv) {
    std::uint16_t width = 346, height = 260;
    std::size_t num_refs = 200, num_queries = 50, j = 150;
    int reps = 5;
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "--frames" && i + 1 < argc) num_refs = std::stoull(argv[++i]);
        else if (a == "--queries" && i + 1 < argc) num_queries = std::stoull(argv[++i]);
        else if (a == "--pixels" && i + 1 < argc) j = std::stoull(argv[++i]);
        else if (a == "--reps" && i + 1 < argc) reps = std::stoi(argv[++i]);
        else {
            std::fprintf(stderr, "usage: %s [--frames N] [--queries N] [--pixels J] [--reps R]\n",
                         argv[0]);
            return 2;
        }
    }

#ifdef _OPENMP
    std::printf("openmp threads: %d\n", omp_get_max_threads());
#else
    std::printf("built without openmp; both columns run serially\n");
#endif
    std::printf("fixture: %ux%u sensor, %zu refs, %zu queries, J=%zu\n\n", width, height,
                num_refs, num_queries, j);

    sevpr::Rng rng(7);
    const auto refs = random_series(width, height, num_refs, rng);
    const auto queries = random_series(width, height, num_queries, rng);
    const auto pixels = sevpr::select_random_pixels(width, height, j, 7);
    const auto ref_desc = sevpr::sparse_descriptors(refs, pixels);
    const auto query_desc = sevpr::sparse_descriptors(queries, pixels);
    const sevpr::PixelMask no_mask(width, height);

    {
        sevpr::VarianceMap serial_out, parallel_out;
        const double s = best_of(reps, [&] { serial_out = sevpr::serial::variance_map(refs, no_mask); });
        const double p = best_of(reps, [&] { parallel_out = sevpr::variance_map(refs, no_mask); });
        report("variance_map", s, p,
               serial_out.variance == parallel_out.variance && serial_out.mean == parallel_out.mean);
    }
    {
        sevpr::DistanceMatrix serial_out, parallel_out;
        const double s =
            best_of(reps, [&] { serial_out = sevpr::serial::distance_matrix(query_desc, ref_desc); });
        const double p =
            best_of(reps, [&] { parallel_out = sevpr::distance_matrix(query_desc, ref_desc); });
        report("sparse_distance_matrix", s, p, serial_out.d == parallel_out.d);
    }
    sevpr::DistanceMatrix dense;
    {
        sevpr::DistanceMatrix serial_out;
        const double s =
            best_of(reps, [&] { serial_out = sevpr::serial::dense_sad_matrix(queries, refs); });
        const double p = best_of(reps, [&] { dense = sevpr::dense_sad_matrix(queries, refs); });
        report("dense_sad_matrix", s, p, serial_out.d == dense.d);
    }
    {
        sevpr::DistanceMatrix serial_out, parallel_out;
        const double s = best_of(reps, [&] { serial_out = sevpr::serial::sequence_convolve(dense, 5); });
        const double p = best_of(reps, [&] { parallel_out = sevpr::sequence_convolve(dense, 5); });
        report("sequence_convolve", s, p, serial_out.d == parallel_out.d);
    }
    return 0;
}
