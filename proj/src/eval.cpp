#include "sevpr/eval.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>

#include <json.hpp>

#include "text_util.hpp"

namespace sevpr {

PoseSample PoseTrack::interpolate(double t_us) const {
    if (samples.empty())
        throw Error(ErrorCode::track_coverage_gap, "empty pose track");
    if (t_us < double(samples.front().t_us) || t_us > double(samples.back().t_us))
        throw Error(ErrorCode::track_coverage_gap,
                    "time " + std::to_string(t_us) + "us outside track span");

    const auto after = std::lower_bound(
        samples.begin(), samples.end(), t_us,
        [](const PoseSample& s, double t) { return double(s.t_us) < t; });
    if (after == samples.begin()) return samples.front();
    const PoseSample& b = *after;
    const PoseSample& a = *(after - 1);
    const double span = double(b.t_us) - double(a.t_us);
    const double w = span > 0.0 ? (t_us - double(a.t_us)) / span : 0.0;
    return PoseSample{static_cast<std::uint64_t>(t_us),
                      a.x_m + (b.x_m - a.x_m) * w,
                      a.y_m + (b.y_m - a.y_m) * w};
}

GroundTruth associate_ground_truth(const PoseTrack& ref_track, const PoseTrack& query_track,
                                   const FrameSeries& ref_frames,
                                   const FrameSeries& query_frames, double tolerance_m) {
    if (tolerance_m < 0.0)
        throw Error(ErrorCode::invalid_argument, "tolerance must be non-negative");

    const auto positions = [](const PoseTrack& track, const FrameSeries& frames) {
        std::vector<PoseSample> out;
        out.reserve(frames.frames.size());
        for (const EventFrame& f : frames.frames)
            out.push_back(track.interpolate(double(f.midpoint_us())));
        return out;
    };
    const std::vector<PoseSample> ref_pos = positions(ref_track, ref_frames);
    const std::vector<PoseSample> query_pos = positions(query_track, query_frames);

    GroundTruth gt;
    gt.num_queries = query_pos.size();
    gt.num_refs = ref_pos.size();
    gt.tolerance_m = tolerance_m;
    gt.correct.assign(gt.num_queries * gt.num_refs, 0);
    for (std::size_t j = 0; j < gt.num_queries; ++j)
        for (std::size_t k = 0; k < gt.num_refs; ++k) {
            const double dx = query_pos[j].x_m - ref_pos[k].x_m;
            const double dy = query_pos[j].y_m - ref_pos[k].y_m;
            if (std::sqrt(dx * dx + dy * dy) <= tolerance_m)
                gt.correct[j * gt.num_refs + k] = 1;
        }
    return gt;
}

PRCurve pr_curve(const DistanceMatrix& d, const GroundTruth& gt) {
    if (d.num_queries != gt.num_queries || d.num_refs != gt.num_refs)
        throw Error(ErrorCode::dimension_mismatch, "matrix and ground truth dimensions differ");
    if (d.num_queries == 0 || d.num_refs == 0)
        throw Error(ErrorCode::invalid_argument, "empty distance matrix");

    const std::size_t q = d.num_queries;
    struct BestEntry {
        double score;
        bool correct;
    };
    std::vector<BestEntry> best(q);
    for (std::size_t j = 0; j < q; ++j) {
        const Match m = best_match(d, j);
        best[j] = {m.score, gt.is_correct(j, m.ref_idx)};
    }
    std::sort(best.begin(), best.end(),
              [](const BestEntry& a, const BestEntry& b) { return a.score < b.score; });

    // Sweep the sorted per-query best scores, plus +inf (forced acceptance).
    std::vector<double> thresholds;
    thresholds.reserve(q + 1);
    for (const BestEntry& e : best)
        if (thresholds.empty() || thresholds.back() != e.score) thresholds.push_back(e.score);
    thresholds.push_back(std::numeric_limits<double>::infinity());

    PRCurve curve;
    curve.num_queries = q;
    curve.points.reserve(thresholds.size());
    std::size_t accepted = 0;
    std::size_t tp = 0;
    for (const double threshold : thresholds) {
        while (accepted < q && best[accepted].score <= threshold) {
            if (best[accepted].correct) ++tp;
            ++accepted;
        }
        PRPoint point;
        point.threshold = threshold;
        point.tp = tp;
        point.fp = accepted - tp;
        point.fn = q - accepted;
        point.precision = accepted ? double(tp) / double(accepted) : 1.0;
        const std::size_t recall_denom = tp + point.fn;
        point.recall = recall_denom ? double(tp) / double(recall_denom) : 0.0;
        curve.points.push_back(point);
    }
    curve.p_at_100r = precision_at_100_recall(curve);
    curve.r_at_99p = recall_at_99_precision(curve);
    return curve;
}

double precision_at_100_recall(const PRCurve& curve) {
    if (curve.points.empty()) throw Error(ErrorCode::invalid_argument, "empty curve");
    return curve.points.back().precision;
}

double recall_at_99_precision(const PRCurve& curve) {
    if (curve.points.empty()) throw Error(ErrorCode::invalid_argument, "empty curve");
    double best = 0.0;
    for (const PRPoint& p : curve.points)
        if (p.precision >= 0.99) best = std::max(best, p.recall);
    return best;
}

PoseTrack load_pose_track(std::istream& in) {
    PoseTrack track;
    std::string line;
    std::size_t row = 0;
    bool saw_header = false;
    while (std::getline(in, line)) {
        ++row;
        const auto text = detail::trim(line);
        if (text.empty() || text.front() == '#') continue;
        if (!saw_header && text.starts_with("t_us")) {
            saw_header = true;
            track.arc_length = text.find("s_m") != std::string_view::npos;
            continue;
        }
        const auto fields = detail::split_fields(text);
        PoseSample sample;
        bool ok = false;
        if (fields.size() == 3) {
            ok = detail::parse_number(fields[0], sample.t_us) &&
                 detail::parse_double(fields[1], sample.x_m) &&
                 detail::parse_double(fields[2], sample.y_m);
        } else if (fields.size() == 2) {
            ok = detail::parse_number(fields[0], sample.t_us) &&
                 detail::parse_double(fields[1], sample.x_m);
            track.arc_length = true;
        }
        if (!ok)
            throw Error(ErrorCode::malformed_record, "bad track row " + std::to_string(row));
        if (!track.samples.empty() && sample.t_us <= track.samples.back().t_us)
            throw Error(ErrorCode::malformed_record,
                        "track timestamps must strictly increase (row " + std::to_string(row) + ")");
        track.samples.push_back(sample);
    }
    return track;
}

void save_pose_track(const PoseTrack& track, std::ostream& out) {
    if (track.arc_length) {
        out << "t_us,s_m\n";
        for (const PoseSample& s : track.samples) out << s.t_us << ',' << s.x_m << '\n';
    } else {
        out << "t_us,x_m,y_m\n";
        for (const PoseSample& s : track.samples)
            out << s.t_us << ',' << s.x_m << ',' << s.y_m << '\n';
    }
}

void save_pr_curve_csv(const PRCurve& curve, std::ostream& out) {
    out << "threshold,precision,recall,tp,fp,fn\n";
    for (const PRPoint& p : curve.points)
        out << p.threshold << ',' << p.precision << ',' << p.recall << ',' << p.tp << ','
            << p.fp << ',' << p.fn << '\n';
}

void save_pr_summary_json(const PRCurve& curve, std::ostream& out) {
    nlohmann::json summary{{"p_at_100r", curve.p_at_100r},
                           {"r_at_99p", curve.r_at_99p},
                           {"n_queries", curve.num_queries}};
    out << summary.dump(2) << '\n';
}

}  // namespace sevpr
