// Command-line front end: every configuration key is a flag of the same name
// and may also come from a flat key=value file passed via --config.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "sevpr/config.hpp"
#include "sevpr/eval.hpp"
#include "sevpr/events.hpp"
#include "sevpr/pipeline.hpp"
#include "sevpr/synth.hpp"

namespace {

using sevpr::ExperimentConfig;

std::vector<std::size_t> parse_size_list(const std::string& text) {
    std::vector<std::size_t> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t comma = text.find(',', start);
        const std::string token = text.substr(start, comma - start);
        if (!token.empty()) out.push_back(std::stoull(token));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

std::vector<std::uint64_t> parse_u64_list(const std::string& text) {
    std::vector<std::uint64_t> out;
    for (std::size_t v : parse_size_list(text)) out.push_back(v);
    return out;
}

struct CliState {
    ExperimentConfig config;
    long long t0_us = -1;  // -1: align to the first event
    std::string j_grid = "10,25,50,100,150";
    std::string n_grid;
    std::string convert_in, convert_out, convert_to;
    std::string events_in;  // preprocess/select input
};

void add_options(CLI::App& app, CliState& state) {
    ExperimentConfig& c = state.config;
    app.add_option("--ref_events", c.ref_events, "reference traverse event file (.csv/.evst)");
    app.add_option("--query_events", c.query_events, "query traverse event file");
    app.add_option("--ref_track", c.ref_track, "reference pose track csv");
    app.add_option("--query_track", c.query_track, "query pose track csv");
    app.add_option("--pixels_file", c.pixels_file, "reuse an exported pixel selection");
    app.add_option("--dmat_file", c.dmat_file, "distance matrix input for eval");
    app.add_option("--width", c.width, "sensor width for csv event input");
    app.add_option("--height", c.height, "sensor height for csv event input");
    app.add_option("--sort_slack_us", c.sort_slack_us, "tolerated timestamp regression");

    app.add_option("--preprocess", c.preprocess, "run burst/hot-pixel removal");
    app.add_option("--hot_sigma", c.hot_sigma, "hot pixel threshold in std devs (inf disables)");
    app.add_option("--burst_bin_us", c.burst_bin_us, "burst detection bin width");
    app.add_option("--burst_ratio", c.burst_ratio, "burst threshold over median bin count");

    app.add_option("--regime", c.regime, "fixed_time or fixed_count");
    app.add_option("--tau_us", c.tau_us, "fixed_time window length");
    app.add_option("--n_events", c.n_events, "fixed_count events per frame");
    app.add_option("--t0_us", state.t0_us, "fixed_time origin (-1: first event)");
    app.add_option("--drop_partial", c.drop_partial, "drop the trailing partial window");

    app.add_option("--num_pixels", c.num_pixels, "number of selected pixels (J)");
    app.add_option("--sigma", c.sigma, "surround suppression width in pixels");
    app.add_option("--seed", c.seed, "base RNG seed");
    app.add_option("--trials", c.trials, "selection trials (seed, seed+1, ...)");
    app.add_option("--strategy", c.strategy, "variance | random | random_no_bottom");

    app.add_option("--seq_len", c.seq_len, "sequence length (L, odd)");
    app.add_option("--seq_align", c.seq_align, "centered | trailing");
    app.add_option("--dense", c.dense, "also run the all-pixel baseline");
    app.add_option("--tolerance_m", c.tolerance_m, "ground-truth distance tolerance");

    app.add_option("--synth_width", c.world.width, "synthetic sensor width");
    app.add_option("--synth_height", c.world.height, "synthetic sensor height");
    app.add_option("--route_m", c.world.route_m, "synthetic route length");
    app.add_option("--step_m", c.world.step_m, "synthetic route step");
    app.add_option("--speed_mps", c.world.speed_mps, "synthetic traversal speed");
    app.add_option("--num_blobs", c.world.num_blobs, "synthetic activity blobs");
    app.add_option("--blob_amp", c.world.blob_amp, "blob peak events per meter");
    app.add_option("--blob_sigma_px", c.world.blob_sigma_px, "blob spatial width");
    app.add_option("--blob_route_sigma_m", c.world.blob_route_sigma_m, "blob route width");
    app.add_option("--planted_pixels", c.world.planted_pixels, "planted informative pixels");
    app.add_option("--planted_amp", c.world.planted_amp, "planted site events per meter");
    app.add_option("--background_epm", c.world.background_epm,
                   "background events per meter per pixel");
    app.add_option("--noise_hz", c.world.noise_hz, "time-locked noise events/s per pixel");
    app.add_option("--world_seed", c.world.seed, "synthetic world seed");
    app.add_option("--speed_scale", c.speed_scale, "query speed factor (synthetic mode)");
    app.add_option("--ref_traverse", c.ref_traverse, "reference traverse realization id");
    app.add_option("--query_traverse", c.query_traverse, "query traverse realization id");

    app.add_option("--j_grid", state.j_grid, "comma-separated J values for exp-select");
    app.add_option("--shift_umax", c.shift_umax, "max |du| for exp-shift");
    app.add_option("--shift_vmax", c.shift_vmax, "max |dv| for exp-shift");
    app.add_option("--shift_step", c.shift_step, "shift grid step");
    app.add_option("--n_grid", state.n_grid, "comma-separated N values for exp-velocity");

    app.add_option("--bench_frames", c.bench_frames, "reference frames in the bench fixture");
    app.add_option("--bench_queries", c.bench_queries, "query rows in the bench fixture");
    app.add_option("--bench_runs", c.bench_runs, "bench repetitions (median reported)");

    app.add_option("--out_dir", c.out_dir, "artifact output directory");
}

void finalize(CliState& state) {
    if (state.t0_us >= 0) state.config.t0_us = static_cast<std::uint64_t>(state.t0_us);
    state.config.j_grid = parse_size_list(state.j_grid);
    state.config.n_grid = parse_u64_list(state.n_grid);
}

sevpr::ParseOptions parse_options_of(const ExperimentConfig& c) {
    return {c.width, c.height, c.sort_slack_us};
}

int cmd_convert(const CliState& state) {
    const ExperimentConfig& c = state.config;
    sevpr::FormatTag in_format = sevpr::format_from_extension(state.convert_in);
    sevpr::FormatTag out_format;
    if (state.convert_to == "csv")
        out_format = sevpr::FormatTag::csv;
    else if (state.convert_to == "evst")
        out_format = sevpr::FormatTag::binary;
    else if (state.convert_to.empty())
        out_format = sevpr::format_from_extension(state.convert_out);
    else
        throw sevpr::Error(sevpr::ErrorCode::config_error, "--to must be csv or evst");

    sevpr::ParseStats stats;
    const sevpr::EventStream stream =
        sevpr::load_events(state.convert_in, in_format, parse_options_of(c), &stats);
    if (stats.zero_polarity_mapped)
        std::fprintf(stderr, "warning: %zu rows had polarity 0, mapped to -1\n",
                     stats.zero_polarity_mapped);
    sevpr::save_events(stream, state.convert_out, out_format);
    std::printf("converted %zu events (%ux%u) -> %s\n", stream.size(), stream.width,
                stream.height, state.convert_out.c_str());
    return 0;
}

int cmd_preprocess(const CliState& state) {
    const ExperimentConfig& c = state.config;
    if (state.events_in.empty())
        throw sevpr::Error(sevpr::ErrorCode::config_error, "preprocess needs an input event file");
    const auto format = sevpr::format_from_extension(state.events_in);
    sevpr::EventStream stream =
        sevpr::load_events(state.events_in, format, parse_options_of(c));
    const std::size_t before = stream.size();
    stream = sevpr::remove_bursts(stream, c.burst_bin_us, c.burst_ratio);
    const std::size_t after_bursts = stream.size();
    const sevpr::PixelMask mask = sevpr::detect_hot_pixels(stream, c.hot_sigma);
    stream = sevpr::filter_masked_events(stream, mask);

    const std::string out_dir = c.out_dir.empty() ? "." : c.out_dir;
    std::filesystem::create_directories(out_dir);
    const std::string events_out =
        out_dir + "/preprocessed" + (format == sevpr::FormatTag::csv ? ".csv" : ".evst");
    sevpr::save_events(stream, events_out, format);
    std::ofstream mask_out(out_dir + "/mask.csv");
    sevpr::save_mask(mask, mask_out);

    std::printf("events: %zu -> %zu after bursts -> %zu after %zu hot pixels\n", before,
                after_bursts, stream.size(), mask.count());
    std::printf("wrote %s and %s/mask.csv\n", events_out.c_str(), out_dir.c_str());
    return 0;
}

int cmd_select(const CliState& state) {
    ExperimentConfig c = state.config;
    if (state.events_in.empty())
        throw sevpr::Error(sevpr::ErrorCode::config_error, "select needs an input event file");
    // Self-pair: selection only touches the reference side.
    c.ref_events = state.events_in;
    c.query_events = state.events_in;
    sevpr::validate_config(c);
    const sevpr::PipelineInputs inputs = sevpr::prepare_inputs(c);
    const sevpr::PixelSet pixels =
        sevpr::select_for_strategy(inputs, c, c.strategy, c.seed);

    const std::string out_dir = c.out_dir.empty() ? "." : c.out_dir;
    std::filesystem::create_directories(out_dir);
    {
        std::ofstream out(out_dir + "/pixels.csv");
        sevpr::save_pixel_set(pixels, out);
    }
    {
        std::ofstream out(out_dir + "/variance.csv");
        sevpr::save_variance_map(inputs.varmap, out);
    }
    std::printf("selected %zu pixels (strategy %s, sigma %.3f, seed %llu) -> %s/pixels.csv\n",
                pixels.size(), c.strategy.c_str(), c.sigma,
                static_cast<unsigned long long>(c.seed), out_dir.c_str());
    return 0;
}

int cmd_match(const CliState& state) {
    const sevpr::Json report = sevpr::run_pipeline(state.config);
    if (report.contains("p_at_100r"))
        std::printf("p_at_100r %.4f  r_at_99p %.4f  (%zu queries)\n",
                    report["p_at_100r"].get<double>(), report["r_at_99p"].get<double>(),
                    report["n_queries"].get<std::size_t>());
    else
        std::printf("distance matrix computed (%zu x %zu); no tracks, evaluation skipped\n",
                    report["query_frames"].get<std::size_t>(),
                    report["ref_frames"].get<std::size_t>());
    if (!state.config.out_dir.empty())
        std::printf("artifacts in %s\n", state.config.out_dir.c_str());
    return 0;
}

int cmd_eval(const CliState& state) {
    const ExperimentConfig& c = state.config;
    if (c.dmat_file.empty() || c.ref_track.empty() || c.query_track.empty() ||
        c.ref_events.empty() || c.query_events.empty())
        throw sevpr::Error(sevpr::ErrorCode::config_error,
                           "eval needs dmat_file, event files and both tracks");
    sevpr::validate_config(c);

    std::ifstream dmat_in(c.dmat_file, std::ios::binary);
    if (!dmat_in)
        throw sevpr::Error(sevpr::ErrorCode::io_error, "cannot open " + c.dmat_file);
    const sevpr::DistanceMatrix d = sevpr::load_distance_matrix(dmat_in);

    // Frame timing is rebuilt from the events with the same parameters that
    // produced the matrix.
    ExperimentConfig frames_config = c;
    frames_config.preprocess = false;
    const sevpr::ParseOptions options = parse_options_of(c);
    const auto ref_stream =
        sevpr::load_events(c.ref_events, sevpr::format_from_extension(c.ref_events), options);
    const auto query_stream = sevpr::load_events(
        c.query_events, sevpr::format_from_extension(c.query_events), options);
    const sevpr::FrameSeries ref_frames = sevpr::build_series(ref_stream, frames_config);
    const sevpr::FrameSeries query_frames = sevpr::build_series(query_stream, frames_config);

    std::ifstream rt(c.ref_track), qt(c.query_track);
    const sevpr::PoseTrack ref_track = sevpr::load_pose_track(rt);
    const sevpr::PoseTrack query_track = sevpr::load_pose_track(qt);
    const sevpr::GroundTruth gt = sevpr::associate_ground_truth(ref_track, query_track, ref_frames,
                                                                query_frames, c.tolerance_m);
    const sevpr::PRCurve curve = sevpr::pr_curve(d, gt);

    const std::string out_dir = c.out_dir.empty() ? "." : c.out_dir;
    std::filesystem::create_directories(out_dir);
    {
        std::ofstream out(out_dir + "/pr_curve.csv");
        sevpr::save_pr_curve_csv(curve, out);
    }
    {
        std::ofstream out(out_dir + "/summary.json");
        sevpr::save_pr_summary_json(curve, out);
    }
    std::printf("p_at_100r %.4f  r_at_99p %.4f  (%zu queries)\n", curve.p_at_100r,
                curve.r_at_99p, curve.num_queries);
    return 0;
}

int cmd_synth(const CliState& state) {
    const ExperimentConfig& c = state.config;
    auto [stream, track] = sevpr::synth_generate(c.world, c.speed_scale, c.ref_traverse);
    const std::string out_dir = c.out_dir.empty() ? "." : c.out_dir;
    std::filesystem::create_directories(out_dir);
    sevpr::save_events(stream, out_dir + "/events.csv", sevpr::FormatTag::csv);
    {
        std::ofstream out(out_dir + "/track.csv");
        sevpr::save_pose_track(track, out);
    }
    std::printf("synthesized %zu events over %.1f m (speed scale %.2f) -> %s\n", stream.size(),
                c.world.route_m, c.speed_scale, out_dir.c_str());
    return 0;
}

int run_command(const std::string& name, const CliState& state) {
    if (name == "convert") return cmd_convert(state);
    if (name == "preprocess") return cmd_preprocess(state);
    if (name == "select") return cmd_select(state);
    if (name == "match") return cmd_match(state);
    if (name == "eval") return cmd_eval(state);
    if (name == "synth") return cmd_synth(state);
    if (name == "exp-select") {
        const sevpr::Json report = sevpr::experiment_selection_compare(state.config);
        for (const auto& row : report["aggregates"])
            std::printf("%-17s J=%-5zu p_at_100r %.4f +- %.4f  r_at_99p %.4f +- %.4f\n",
                        row["strategy"].get<std::string>().c_str(), row["j"].get<std::size_t>(),
                        row["mean_p_at_100r"].get<double>(), row["std_p_at_100r"].get<double>(),
                        row["mean_r_at_99p"].get<double>(), row["std_r_at_99p"].get<double>());
        return 0;
    }
    if (name == "exp-shift") {
        const sevpr::Json report = sevpr::experiment_pixel_shift(state.config);
        for (const auto& row : report["offsets"])
            std::printf("shift (%+3d,%+3d)  sparse p_at_100r %.4f +- %.4f  dense %.4f\n",
                        row["du"].get<int>(), row["dv"].get<int>(),
                        row["mean_sparse_p_at_100r"].get<double>(),
                        row["std_sparse_p_at_100r"].get<double>(),
                        row["dense_p_at_100r"].get<double>());
        return 0;
    }
    if (name == "exp-velocity") {
        const sevpr::Json report = sevpr::experiment_velocity_warp(state.config);
        for (const auto& row : report["sweep"])
            std::printf("N=%-8llu tau_matched %llu us  fixed_n %.4f +- %.4f  fixed_tau %.4f +- %.4f\n",
                        row["n"].get<unsigned long long>(),
                        row["tau_matched_us"].get<unsigned long long>(),
                        row["fixed_n_mean"].get<double>(), row["fixed_n_std"].get<double>(),
                        row["fixed_tau_mean"].get<double>(), row["fixed_tau_std"].get<double>());
        return 0;
    }
    if (name == "bench") {
        const sevpr::Json report = sevpr::bench_runtime(state.config);
        std::printf("sparse row %.4f ms, dense row %.4f ms, speedup %.1fx (median of %zu)\n",
                    report["sparse_row_ms_median"].get<double>(),
                    report["dense_row_ms_median"].get<double>(),
                    report["speedup"].get<double>(), report["runs"].get<std::size_t>());
        if (report.contains("warning"))
            std::fprintf(stderr, "warning: %s\n", report["warning"].get<std::string>().c_str());
        return 0;
    }
    throw sevpr::Error(sevpr::ErrorCode::config_error, "unknown subcommand: " + name);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Event-camera place recognition with sparse highly-varying pixels"};
    app.set_config("--config", "", "flat key=value configuration file");
    app.require_subcommand(1);

    CliState state;
    add_options(app, state);

    CLI::App* convert = app.add_subcommand("convert", "convert events between csv and evst");
    convert->add_option("input", state.convert_in, "input event file")->required();
    convert->add_option("output", state.convert_out, "output event file")->required();
    convert->add_option("--to", state.convert_to, "target format: csv | evst");

    CLI::App* preprocess =
        app.add_subcommand("preprocess", "burst removal and hot-pixel masking");
    preprocess->add_option("input", state.events_in, "input event file")->required();

    CLI::App* select = app.add_subcommand("select", "variance map and pixel selection");
    select->add_option("input", state.events_in, "reference event file")->required();

    std::vector<CLI::App*> subs = {convert, preprocess, select};
    subs.push_back(app.add_subcommand("match", "full matching pipeline on a traverse pair"));
    subs.push_back(app.add_subcommand("eval", "precision-recall from a stored distance matrix"));
    subs.push_back(app.add_subcommand("synth", "generate a synthetic traverse"));
    subs.push_back(
        app.add_subcommand("exp-select", "selection strategy comparison over a J grid"));
    subs.push_back(app.add_subcommand("exp-shift", "pixel misalignment robustness sweep"));
    subs.push_back(app.add_subcommand("exp-velocity", "fixed-N vs fixed-tau under speed change"));
    subs.push_back(app.add_subcommand("bench", "sparse vs dense distance runtime"));
    for (CLI::App* sub : subs) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        finalize(state);
        return run_command(app.get_subcommands().front()->get_name(), state);
    } catch (const sevpr::Error& e) {
        std::fprintf(stderr, "error (%s): %s\n", sevpr::error_code_name(e.code()), e.what());
        return e.exit_code();
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
}
