#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "oracles.hpp"
#include "sevpr/rng.hpp"
#include "sevpr/select.hpp"

using namespace sevpr;

namespace {

FrameSeries series_from_counts(std::uint16_t width, std::uint16_t height,
                               const std::vector<std::vector<std::uint32_t>>& per_frame) {
    FrameSeries f;
    f.width = width;
    f.height = height;
    f.regime = AccumRegime::fixed_time(1);
    for (std::size_t k = 0; k < per_frame.size(); ++k) {
        EventFrame frame;
        frame.width = width;
        frame.height = height;
        frame.counts = per_frame[k];
        frame.t_start = k;
        frame.t_end = k + 1;
        f.frames.push_back(frame);
    }
    return f;
}

SelectionPmf pmf_from(std::uint16_t width, std::uint16_t height, std::vector<double> weights) {
    double total = 0;
    for (double w : weights) total += w;
    for (double& w : weights) w /= total;
    return SelectionPmf{width, height, std::move(weights)};
}

double mean_nn_distance(const PixelSet& set) {
    double sum = 0.0;
    for (std::size_t i = 0; i < set.pixels.size(); ++i) {
        double best = 1e300;
        for (std::size_t j = 0; j < set.pixels.size(); ++j) {
            if (i == j) continue;
            const double du = double(set.pixels[i].u) - set.pixels[j].u;
            const double dv = double(set.pixels[i].v) - set.pixels[j].v;
            best = std::min(best, std::sqrt(du * du + dv * dv));
        }
        sum += best;
    }
    return sum / double(set.pixels.size());
}

}  // namespace

TEST_CASE("variance map hand cases") {
    // single pixel observed as [2,4,6]
    const FrameSeries f = series_from_counts(1, 1, {{2}, {4}, {6}});
    const VarianceMap vm = variance_map(f, PixelMask(1, 1));
    CHECK(vm.var_at(0, 0) == 8.0 / 3.0);
    CHECK(vm.mean[0] == 4.0);

    // constant counts
    const FrameSeries c = series_from_counts(1, 1, {{5}, {5}, {5}, {5}});
    CHECK(variance_map(c, PixelMask(1, 1)).var_at(0, 0) == 0.0);

    // two pixels, [0,2] and [1,1]
    const FrameSeries two = series_from_counts(2, 1, {{0, 1}, {2, 1}});
    const VarianceMap vm2 = variance_map(two, PixelMask(2, 1));
    CHECK(vm2.var_at(0, 0) == 1.0);
    CHECK(vm2.var_at(1, 0) == 0.0);
}

TEST_CASE("variance map zeroes masked pixels and needs two frames") {
    const FrameSeries f = series_from_counts(2, 1, {{0, 1}, {2, 1}});
    PixelMask mask(2, 1);
    mask.mask(0, 0);
    const VarianceMap vm = variance_map(f, mask);
    CHECK(vm.var_at(0, 0) == 0.0);

    const FrameSeries single = series_from_counts(2, 1, {{0, 1}});
    CHECK_THROWS_AS((void)variance_map(single, PixelMask(2, 1)), Error);
}

TEST_CASE("selection pmf normalizes variance") {
    VarianceMap vm;
    vm.width = 2;
    vm.height = 1;
    vm.num_frames = 2;
    vm.variance = {1.0, 3.0};
    vm.mean = {0.0, 0.0};
    const SelectionPmf pmf = selection_pmf(vm);
    CHECK(pmf.p[0] == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(pmf.p[1] == doctest::Approx(0.75).epsilon(1e-12));

    vm.variance = {0.0, 0.0};
    CHECK_THROWS_AS((void)selection_pmf(vm), Error);
}

TEST_CASE("selection pmf sums to one on random grids") {
    Rng rng(4);
    for (int trial = 0; trial < 20; ++trial) {
        VarianceMap vm;
        vm.width = 17;
        vm.height = 9;
        vm.num_frames = 2;
        vm.variance.resize(17 * 9);
        vm.mean.assign(17 * 9, 0.0);
        for (double& s : vm.variance) s = rng.uniform() * 100.0;
        const SelectionPmf pmf = selection_pmf(vm);
        double total = 0;
        for (double p : pmf.p) total += p;
        CHECK(std::abs(total - 1.0) <= 1e-9);
    }
}

TEST_CASE("selection pmf is scale invariant") {
    Rng rng(5);
    VarianceMap vm;
    vm.width = 11;
    vm.height = 7;
    vm.num_frames = 2;
    vm.variance.resize(77);
    vm.mean.assign(77, 0.0);
    for (double& s : vm.variance) s = rng.uniform();
    const SelectionPmf base = selection_pmf(vm);
    for (double c : {3.0, 0.125, 1e6}) {
        VarianceMap scaled = vm;
        for (double& s : scaled.variance) s *= c;
        const SelectionPmf pmf = selection_pmf(scaled);
        for (std::size_t i = 0; i < pmf.p.size(); ++i)
            CHECK(std::abs(pmf.p[i] - base.p[i]) <= 1e-12);
    }
}

TEST_CASE("suppression weight hand values") {
    CHECK(suppression_weight(0, 0, 1.0) == 0.0);
    CHECK(suppression_weight(0, 0, 25.0) == 0.0);
    CHECK(suppression_weight(300, 300, 2.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(suppression_weight(7, 0, 7.0) ==
          doctest::Approx(1.0 - std::exp(-0.5)).epsilon(1e-12));
    CHECK(suppression_weight(3, -4, 5.0) ==
          doctest::Approx(1.0 - std::exp(-25.0 / 50.0)).epsilon(1e-12));
}

TEST_CASE("select_pixels: forced and near-forced draws") {
    // all mass on one pixel
    const SelectionPmf point = pmf_from(3, 3, {0, 0, 0, 0, 1, 0, 0, 0, 0});
    for (std::uint64_t seed : {0ull, 1ull, 99ull}) {
        const PixelSet set = select_pixels(point, 1, 1.0, seed);
        REQUIRE(set.size() == 1);
        CHECK(set.pixels[0] == Pixel{1, 1});
    }
    // a second draw has nowhere to go
    CHECK_THROWS_AS((void)select_pixels(point, 2, 1.0, 0), Error);

    // two distant equal masses: both always selected
    std::vector<double> weights(40, 0.0);
    weights[0] = 1.0;
    weights[39] = 1.0;
    const SelectionPmf two = pmf_from(40, 1, weights);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const PixelSet set = select_pixels(two, 2, 1.0, seed);
        const std::set<std::size_t> got{grid_index(40, set.pixels[0].u, set.pixels[0].v),
                                        grid_index(40, set.pixels[1].u, set.pixels[1].v)};
        CHECK(got == std::set<std::size_t>{0, 39});
    }
}

TEST_CASE("select_pixels is deterministic and never repeats a pixel") {
    Rng rng(8);
    SelectionPmf pmf;
    pmf.width = 12;
    pmf.height = 10;
    pmf.p.resize(120);
    double total = 0;
    for (double& p : pmf.p) {
        p = rng.uniform();
        total += p;
    }
    for (double& p : pmf.p) p /= total;

    const PixelSet a = select_pixels(pmf, 30, 2.0, 42);
    const PixelSet b = select_pixels(pmf, 30, 2.0, 42);
    CHECK(a.pixels == b.pixels);
    const PixelSet c = select_pixels(pmf, 30, 2.0, 43);
    CHECK(a.pixels != c.pixels);

    std::set<std::pair<int, int>> seen;
    for (const Pixel& p : a.pixels) CHECK(seen.insert({p.u, p.v}).second);
}

TEST_CASE("select_pixels draw frequencies match exhaustive enumeration on a 4x4 grid") {
    // smaller sibling of the acceptance check, J=2 for speed
    Rng rng(21);
    SelectionPmf pmf;
    pmf.width = 4;
    pmf.height = 4;
    pmf.p.resize(16);
    double total = 0;
    for (double& p : pmf.p) {
        p = 0.2 + rng.uniform();
        total += p;
    }
    for (double& p : pmf.p) p /= total;

    const auto enumeration = oracle::enumerate_draws(pmf.p, 4, 1.5, 2);
    std::map<std::vector<std::size_t>, double> expected;
    for (std::size_t i = 0; i < enumeration.outcomes.size(); ++i)
        expected[enumeration.outcomes[i]] = enumeration.probabilities[i];

    const int runs = 40000;
    std::map<std::vector<std::size_t>, int> observed;
    for (int run = 0; run < runs; ++run) {
        const PixelSet set = select_pixels(pmf, 2, 1.5, 1000 + run);
        observed[{grid_index(4, set.pixels[0].u, set.pixels[0].v),
                  grid_index(4, set.pixels[1].u, set.pixels[1].v)}]++;
    }
    for (const auto& [outcome, prob] : expected) {
        const double freq = double(observed[outcome]) / runs;
        CHECK(std::abs(freq - prob) < 0.02);
    }
}

TEST_CASE("surround suppression spreads selections out") {
    const std::uint16_t width = 346, height = 260;
    SelectionPmf uniform;
    uniform.width = width;
    uniform.height = height;
    uniform.p.assign(std::size_t(width) * height, 1.0 / (double(width) * height));

    double suppressed_nn = 0.0, random_nn = 0.0;
    const int trials = 10;
    for (int t = 0; t < trials; ++t) {
        suppressed_nn += mean_nn_distance(select_pixels(uniform, 150, 7.0, 100 + t));
        random_nn += mean_nn_distance(select_random_pixels(width, height, 150, 100 + t));
    }
    suppressed_nn /= trials;
    random_nn /= trials;
    CHECK(suppressed_nn > random_nn * 1.15);
}

TEST_CASE("select_random_pixels covers the grid and honors exclusions") {
    const PixelSet all = select_random_pixels(8, 6, 48, 7);
    std::set<std::pair<int, int>> seen;
    for (const Pixel& p : all.pixels) seen.insert({p.u, p.v});
    CHECK(seen.size() == 48);

    const Rect bottom = bottom_third(8, 6);
    CHECK(bottom.v0 == 4);
    const PixelSet top_only = select_random_pixels(8, 6, 30, 7, bottom);
    for (const Pixel& p : top_only.pixels) CHECK(p.v < 4);
    CHECK_THROWS_AS((void)select_random_pixels(8, 6, 33, 7, bottom), Error);

    const PixelSet again = select_random_pixels(8, 6, 20, 9);
    CHECK(select_random_pixels(8, 6, 20, 9).pixels == again.pixels);
}

TEST_CASE("select_random_pixels skips masked pixels") {
    PixelMask mask(4, 4);
    mask.mask(0, 0);
    mask.mask(1, 1);
    const PixelSet set = select_random_pixels(4, 4, 14, 3, std::nullopt, &mask);
    CHECK(set.size() == 14);
    for (const Pixel& p : set.pixels) CHECK_FALSE(mask.is_masked(p.u, p.v));
}

TEST_CASE("pixel set export and import round trip") {
    PixelSet set;
    set.seed = 77;
    set.sigma = 3.5;
    set.pixels = {{4, 5}, {0, 0}, {120, 90}};
    std::stringstream buffer;
    save_pixel_set(set, buffer);
    const PixelSet loaded = load_pixel_set(buffer);
    CHECK(loaded.pixels == set.pixels);
    CHECK(loaded.seed == 77);
    CHECK(loaded.sigma == doctest::Approx(3.5));
}

TEST_CASE("variance map export format") {
    const FrameSeries f = series_from_counts(2, 1, {{0, 1}, {2, 1}});
    const VarianceMap vm = variance_map(f, PixelMask(2, 1));
    std::ostringstream out;
    save_variance_map(vm, out);
    CHECK(out.str() == "u,v,S\n0,0,1\n1,0,0\n");
}
