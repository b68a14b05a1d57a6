#pragma once

#include <string>

#include <json.hpp>

#include "sevpr/config.hpp"
#include "sevpr/eval.hpp"
#include "sevpr/match.hpp"
#include "sevpr/preprocess.hpp"
#include "sevpr/select.hpp"

namespace sevpr {

using Json = nlohmann::json;

/// Shared state prepared once per experiment: loaded (or synthesized) streams,
/// preprocessing mask from the reference traverse, frames, and the selection
/// pmf over the reference variance map.
struct PipelineInputs {
    EventStream ref_events;
    EventStream query_events;
    PoseTrack ref_track;    // may be empty -> evaluation skipped
    PoseTrack query_track;
    PixelMask mask;
    FrameSeries ref_frames;
    FrameSeries query_frames;
    VarianceMap varmap;
    SelectionPmf pmf;
};

struct MatchResult {
    DistanceMatrix seq;  // sequence-aggregated matrix used for evaluation
    PRCurve curve;
    double p_at_100r = 0.0;
    double r_at_99p = 0.0;
    bool evaluated = false;
};

PipelineInputs prepare_inputs(const ExperimentConfig& config);

FrameSeries build_series(const EventStream& stream, const ExperimentConfig& config);

/// Selection under one of the three strategies; the random ones ignore the
/// pmf and sample the sensor directly (minus the mask).
PixelSet select_for_strategy(const PipelineInputs& inputs, const ExperimentConfig& config,
                             const std::string& strategy, std::uint64_t seed);

/// Descriptor extraction, sparse SAD matrix, sequence aggregation and (when
/// both tracks are present) the precision-recall evaluation.
MatchResult match_and_eval(const FrameSeries& ref_frames, const FrameSeries& query_frames,
                           const PoseTrack& ref_track, const PoseTrack& query_track,
                           const PixelSet& pixels, const ExperimentConfig& config);

/// Same, but with the all-pixel SAD baseline instead of a sparse selection.
MatchResult match_and_eval_dense(const FrameSeries& ref_frames, const FrameSeries& query_frames,
                                 const PoseTrack& ref_track, const PoseTrack& query_track,
                                 const ExperimentConfig& config);

/// One end-to-end run: parse/synth -> preprocess -> frames -> select ->
/// match -> evaluate. Writes artifacts into config.out_dir when set and
/// returns the JSON report (no timing fields; byte-identical given the same
/// config and seeds).
Json run_pipeline(const ExperimentConfig& config);

/// Selection-strategy comparison across a J grid, `trials` selection seeds
/// per cell (seed+0 .. seed+trials-1), mean and std of P@100R and R@99P.
Json experiment_selection_compare(const ExperimentConfig& config);

/// Query-frame pixel-shift sweep; per offset reports sparse (per-trial) and
/// dense P@100R.
Json experiment_pixel_shift(const ExperimentConfig& config);

/// Fixed-N versus matched-window fixed-tau comparison on a speed-warped
/// query, same pixel subset for both regimes; sweeps n_grid.
Json experiment_velocity_warp(const ExperimentConfig& config);

/// Median wall time of sparse (J pixels) versus dense (all pixels) distance
/// rows on a random fixture; reports the speedup ratio.
Json bench_runtime(const ExperimentConfig& config);

/// Writes pretty JSON to <out_dir>/<name> (creates directories).
void write_report(const Json& report, const std::string& out_dir, const std::string& name);

}  // namespace sevpr
