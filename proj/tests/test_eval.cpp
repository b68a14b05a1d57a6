#include <doctest.h>

#include <cmath>
#include <sstream>

#include "oracles.hpp"
#include "sevpr/eval.hpp"
#include "sevpr/rng.hpp"

using namespace sevpr;

namespace {

PoseTrack line_track(std::uint64_t t_step_us, double speed_mps, std::size_t samples) {
    PoseTrack track;
    for (std::size_t i = 0; i < samples; ++i)
        track.samples.push_back(
            {i * t_step_us, speed_mps * double(i * t_step_us) * 1e-6, 0.0});
    return track;
}

FrameSeries timed_frames(std::size_t count, std::uint64_t tau_us) {
    FrameSeries f;
    f.width = 1;
    f.height = 1;
    f.regime = AccumRegime::fixed_time(tau_us);
    for (std::size_t k = 0; k < count; ++k) {
        EventFrame frame;
        frame.width = 1;
        frame.height = 1;
        frame.counts = {0};
        frame.t_start = k * tau_us;
        frame.t_end = (k + 1) * tau_us;
        f.frames.push_back(frame);
    }
    return f;
}

DistanceMatrix matrix_of(std::size_t q, std::size_t r, std::vector<double> values) {
    DistanceMatrix d;
    d.num_queries = q;
    d.num_refs = r;
    d.d = std::move(values);
    return d;
}

GroundTruth diag_gt(std::size_t n) {
    GroundTruth gt;
    gt.num_queries = n;
    gt.num_refs = n;
    gt.correct.assign(n * n, 0);
    for (std::size_t j = 0; j < n; ++j) gt.correct[j * n + j] = 1;
    return gt;
}

}  // namespace

TEST_CASE("pose track interpolation is linear and bounded") {
    PoseTrack track;
    track.samples = {{0, 0.0, 0.0}, {1000, 10.0, 2.0}, {3000, 10.0, 6.0}};
    const PoseSample mid = track.interpolate(500);
    CHECK(mid.x_m == doctest::Approx(5.0));
    CHECK(mid.y_m == doctest::Approx(1.0));
    const PoseSample exact = track.interpolate(1000);
    CHECK(exact.x_m == doctest::Approx(10.0));
    CHECK(track.interpolate(0).x_m == 0.0);
    CHECK(track.interpolate(3000).y_m == doctest::Approx(6.0));
    CHECK_THROWS_AS((void)track.interpolate(3001), Error);
    CHECK_THROWS_AS((void)track.interpolate(-1.0), Error);
}

TEST_CASE("ground truth association: identical tracks include the diagonal") {
    const PoseTrack track = line_track(1000000, 1.0, 12);
    const FrameSeries frames = timed_frames(10, 1000000);
    const GroundTruth gt = associate_ground_truth(track, track, frames, frames, 0.5);
    for (std::size_t j = 0; j < 10; ++j) CHECK(gt.is_correct(j, j));
}

TEST_CASE("ground truth association: zero tolerance needs exact coincidence") {
    const PoseTrack track = line_track(1000000, 1.0, 12);
    const FrameSeries frames = timed_frames(10, 1000000);
    const GroundTruth gt = associate_ground_truth(track, track, frames, frames, 0.0);
    for (std::size_t j = 0; j < 10; ++j)
        for (std::size_t k = 0; k < 10; ++k) CHECK(gt.is_correct(j, k) == (j == k));
}

TEST_CASE("ground truth association: constant velocity gives a diagonal band") {
    // 1 m/s, 1 s frames, 3 m tolerance -> band of half-width 3 frames
    const PoseTrack track = line_track(1000000, 1.0, 40);
    const FrameSeries frames = timed_frames(30, 1000000);
    const GroundTruth gt = associate_ground_truth(track, track, frames, frames, 3.0);
    for (std::size_t j = 0; j < 30; ++j)
        for (std::size_t k = 0; k < 30; ++k) {
            const bool in_band = std::llabs(std::int64_t(j) - std::int64_t(k)) <= 3;
            CHECK(gt.is_correct(j, k) == in_band);
        }
}

TEST_CASE("ground truth association: coverage gap errors") {
    const PoseTrack track = line_track(1000000, 1.0, 5);  // covers 4 s
    const FrameSeries frames = timed_frames(10, 1000000);
    CHECK_THROWS_AS((void)associate_ground_truth(track, track, frames, frames, 1.0), Error);
}

TEST_CASE("pr curve: perfect and inverted matchers") {
    // zero diagonal: best match j == j, all correct
    DistanceMatrix d = matrix_of(4, 4, std::vector<double>(16, 5.0));
    for (std::size_t j = 0; j < 4; ++j) d.at(j, j) = double(j);
    const PRCurve perfect = pr_curve(d, diag_gt(4));
    for (const PRPoint& p : perfect.points) CHECK(p.precision == 1.0);
    CHECK(perfect.p_at_100r == 1.0);
    CHECK(perfect.r_at_99p == 1.0);
    CHECK(precision_at_100_recall(perfect) == 1.0);
    CHECK(recall_at_99_precision(perfect) == 1.0);

    // all best matches wrong
    GroundTruth inverted = diag_gt(4);
    inverted.correct.assign(16, 0);
    const PRCurve zero = pr_curve(d, inverted);
    for (const PRPoint& p : zero.points) CHECK(p.precision == 0.0);
    CHECK(zero.p_at_100r == 0.0);
    CHECK(zero.r_at_99p == 0.0);
}

TEST_CASE("pr curve: four-query hand case") {
    // queries 0,1 match correctly with scores 1,2; queries 2,3 match wrongly
    // with scores 3,4
    DistanceMatrix d = matrix_of(4, 4, std::vector<double>(16, 100.0));
    d.at(0, 0) = 1.0;
    d.at(1, 1) = 2.0;
    d.at(2, 1) = 3.0;  // true place 2
    d.at(3, 0) = 4.0;  // true place 3
    const PRCurve curve = pr_curve(d, diag_gt(4));

    REQUIRE(curve.points.size() == 5);  // 4 distinct scores + inf
    const PRPoint& at2 = curve.points[1];
    CHECK(at2.threshold == 2.0);
    CHECK(at2.precision == 1.0);
    CHECK(at2.recall == 0.5);
    CHECK(at2.tp == 2);
    CHECK(at2.fp == 0);
    CHECK(at2.fn == 2);

    const PRPoint& forced = curve.points.back();
    CHECK(std::isinf(forced.threshold));
    CHECK(forced.precision == 0.5);
    CHECK(forced.tp + forced.fp + forced.fn == 4);
    CHECK(curve.p_at_100r == 0.5);

    // every point satisfies the defining identities
    for (const PRPoint& p : curve.points) {
        CHECK(p.tp + p.fp + p.fn == 4);
        if (p.tp + p.fp > 0)
            CHECK(p.precision == doctest::Approx(double(p.tp) / double(p.tp + p.fp)));
        if (p.tp + p.fn > 0)
            CHECK(p.recall == doctest::Approx(double(p.tp) / double(p.tp + p.fn)));
    }
}

TEST_CASE("pr curve: recall is monotone and acceptance counts add up") {
    Rng rng(5);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t q = 8, r = 9;
        DistanceMatrix d = matrix_of(q, r, {});
        d.d.resize(q * r);
        for (double& x : d.d) x = double(rng.below(40));
        GroundTruth gt;
        gt.num_queries = q;
        gt.num_refs = r;
        gt.correct.resize(q * r);
        for (auto& c : gt.correct) c = rng.below(4) == 0 ? 1 : 0;

        const PRCurve curve = pr_curve(d, gt);
        double prev_recall = -1.0;
        for (const PRPoint& p : curve.points) {
            CHECK(p.recall >= prev_recall);
            prev_recall = p.recall;
            CHECK(p.tp + p.fp + p.fn == q);
        }
    }
}

TEST_CASE("pr curve: positive scaling leaves the curve unchanged") {
    Rng rng(6);
    DistanceMatrix d = matrix_of(10, 10, {});
    d.d.resize(100);
    for (double& x : d.d) x = double(rng.below(64));
    GroundTruth gt = diag_gt(10);
    const PRCurve base = pr_curve(d, gt);
    for (double c : {0.5, 3.0, 1e4}) {
        DistanceMatrix scaled = d;
        for (double& x : scaled.d) x *= c;
        const PRCurve curve = pr_curve(scaled, gt);
        REQUIRE(curve.points.size() == base.points.size());
        for (std::size_t i = 0; i < curve.points.size(); ++i) {
            CHECK(curve.points[i].tp == base.points[i].tp);
            CHECK(curve.points[i].fp == base.points[i].fp);
            CHECK(curve.points[i].fn == base.points[i].fn);
            CHECK(curve.points[i].precision == base.points[i].precision);
            CHECK(curve.points[i].recall == base.points[i].recall);
        }
    }
}

TEST_CASE("pr curve equals the exhaustive recount oracle") {
    Rng rng(7);
    for (int trial = 0; trial < 25; ++trial) {
        const std::size_t q = 2 + rng.below(9), r = 2 + rng.below(9);
        DistanceMatrix d = matrix_of(q, r, {});
        d.d.resize(q * r);
        for (double& x : d.d) x = double(rng.below(30));
        GroundTruth gt;
        gt.num_queries = q;
        gt.num_refs = r;
        gt.correct.resize(q * r);
        for (auto& c : gt.correct) c = rng.below(3) == 0 ? 1 : 0;

        const PRCurve curve = pr_curve(d, gt);
        const auto expected = oracle::pr_recount(d, gt);
        REQUIRE(curve.points.size() == expected.size());
        for (std::size_t i = 0; i < expected.size(); ++i) {
            CHECK(curve.points[i].threshold == expected[i].threshold);
            CHECK(curve.points[i].tp == expected[i].tp);
            CHECK(curve.points[i].fp == expected[i].fp);
            CHECK(curve.points[i].fn == expected[i].fn);
            CHECK(curve.points[i].precision == expected[i].precision);
            CHECK(curve.points[i].recall == expected[i].recall);
        }
    }
}

TEST_CASE("pr curve rejects mismatched dimensions") {
    const DistanceMatrix d = matrix_of(2, 2, {1, 2, 3, 4});
    CHECK_THROWS_AS((void)pr_curve(d, diag_gt(3)), Error);
}

TEST_CASE("recall at 99 precision scans the curve") {
    PRCurve curve;
    curve.num_queries = 10;
    curve.points = {{1.0, 1.0, 0.3, 3, 0, 7}, {2.0, 0.95, 0.6, 6, 1, 3}};
    CHECK(recall_at_99_precision(curve) == 0.3);
    curve.points[1].precision = 0.99;
    CHECK(recall_at_99_precision(curve) == 0.6);
}

TEST_CASE("pose track csv round trip, planar and arc-length") {
    PoseTrack planar;
    planar.samples = {{0, 1.5, -2.0}, {100, 2.5, 0.0}};
    std::stringstream buffer;
    save_pose_track(planar, buffer);
    const PoseTrack p = load_pose_track(buffer);
    CHECK_FALSE(p.arc_length);
    REQUIRE(p.samples.size() == 2);
    CHECK(p.samples[0].x_m == 1.5);
    CHECK(p.samples[0].y_m == -2.0);

    std::istringstream arc("t_us,s_m\n0,0.0\n50,1.25\n");
    const PoseTrack a = load_pose_track(arc);
    CHECK(a.arc_length);
    CHECK(a.samples[1].x_m == 1.25);
    CHECK(a.samples[1].y_m == 0.0);

    std::istringstream bad("t_us,x_m,y_m\n10,0,0\n5,1,1\n");
    CHECK_THROWS_AS((void)load_pose_track(bad), Error);
}

TEST_CASE("pr curve csv and json summary formats") {
    PRCurve curve;
    curve.num_queries = 2;
    curve.p_at_100r = 0.5;
    curve.r_at_99p = 0.25;
    curve.points = {{1.5, 1.0, 0.5, 1, 0, 1}};
    std::ostringstream csv;
    save_pr_curve_csv(curve, csv);
    CHECK(csv.str() == "threshold,precision,recall,tp,fp,fn\n1.5,1,0.5,1,0,1\n");

    std::ostringstream json;
    save_pr_summary_json(curve, json);
    CHECK(json.str().find("\"p_at_100r\": 0.5") != std::string::npos);
    CHECK(json.str().find("\"r_at_99p\": 0.25") != std::string::npos);
    CHECK(json.str().find("\"n_queries\": 2") != std::string::npos);
}
