#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "sevpr/common.hpp"
#include "sevpr/frames.hpp"
#include "sevpr/match.hpp"

namespace sevpr {

struct PoseSample {
    std::uint64_t t_us = 0;
    double x_m = 0.0;
    double y_m = 0.0;  // zero for arc-length tracks
};

/// Time-ordered positions; strictly increasing timestamps.
struct PoseTrack {
    std::vector<PoseSample> samples;
    bool arc_length = false;  // loaded from a "t_us,s_m" file

    bool empty() const { return samples.empty(); }

    /// Linear interpolation at t; errors with track_coverage_gap outside the
    /// sampled span.
    PoseSample interpolate(double t_us) const;
};

/// Which (query, reference) frame pairs count as a correct match.
struct GroundTruth {
    std::size_t num_queries = 0;
    std::size_t num_refs = 0;
    double tolerance_m = 0.0;
    std::vector<std::uint8_t> correct;  // row-major

    bool is_correct(std::size_t j, std::size_t k) const {
        return correct[j * num_refs + k] != 0;
    }
};

struct PRPoint {
    double threshold = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    std::size_t tp = 0, fp = 0, fn = 0;
};

struct PRCurve {
    std::vector<PRPoint> points;  // ascending threshold, last one at +inf
    double p_at_100r = 0.0;
    double r_at_99p = 0.0;
    std::size_t num_queries = 0;
};

/// Positions each frame at its window midpoint via track interpolation;
/// correct(j,k) iff the Euclidean distance is within the tolerance.
GroundTruth associate_ground_truth(const PoseTrack& ref_track, const PoseTrack& query_track,
                                   const FrameSeries& ref_frames,
                                   const FrameSeries& query_frames, double tolerance_m);

/// Sweeps acceptance thresholds over the per-query best-match scores (plus
/// +inf). At each threshold: queries with best score <= threshold are
/// accepted; an accepted query is tp if its argmin reference is correct, else
/// fp; rejected queries are fn (every query is assumed to have a true match),
/// so tp+fp+fn equals the query count at every point.
PRCurve pr_curve(const DistanceMatrix& d, const GroundTruth& gt);

/// Precision when every query is forced to accept its best match.
double precision_at_100_recall(const PRCurve& curve);

/// Highest recall among points with precision >= 0.99, or 0 if none qualify.
double recall_at_99_precision(const PRCurve& curve);

/// Track file: header "t_us,x_m,y_m" (planar) or "t_us,s_m" (arc-length).
PoseTrack load_pose_track(std::istream& in);
void save_pose_track(const PoseTrack& track, std::ostream& out);

/// Curve CSV: "threshold,precision,recall,tp,fp,fn" rows.
void save_pr_curve_csv(const PRCurve& curve, std::ostream& out);

/// JSON summary {"p_at_100r": ..., "r_at_99p": ..., "n_queries": ...}.
void save_pr_summary_json(const PRCurve& curve, std::ostream& out);

}  // namespace sevpr
