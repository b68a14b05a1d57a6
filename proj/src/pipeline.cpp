#include "sevpr/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>

#include "sevpr/rng.hpp"
#include "sevpr/synth.hpp"
#include "text_util.hpp"

namespace sevpr {

namespace {

double mean_of(const std::vector<double>& xs) {
    return xs.empty() ? 0.0 : std::accumulate(xs.begin(), xs.end(), 0.0) / double(xs.size());
}

double sample_std(const std::vector<double>& xs) {
    if (xs.size() < 2) return 0.0;
    const double m = mean_of(xs);
    double acc = 0.0;
    for (double x : xs) acc += (x - m) * (x - m);
    return std::sqrt(acc / double(xs.size() - 1));
}

// Runs one pure job per cell on the worker pool; kernel-level parallel
// regions inside the cells serialize automatically (no nesting).
template <typename F>
void parallel_cells(std::int64_t n, F&& f) {
    std::exception_ptr first_error = nullptr;
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t i = 0; i < n; ++i) {
        try {
            f(static_cast<std::size_t>(i));
        } catch (...) {
#pragma omp critical
            {
                if (!first_error) first_error = std::current_exception();
            }
        }
    }
    if (first_error) std::rethrow_exception(first_error);
}

void require_tracks(const PipelineInputs& inputs) {
    if (inputs.ref_track.empty() || inputs.query_track.empty())
        throw Error(ErrorCode::config_error, "experiment needs pose tracks for ground truth");
}

Json config_echo(const ExperimentConfig& config) {
    Json echo;
    echo["regime"] = config.regime;
    echo["tau_us"] = config.tau_us;
    echo["n_events"] = config.n_events;
    echo["num_pixels"] = config.num_pixels;
    echo["sigma"] = config.sigma;
    echo["seq_len"] = config.seq_len;
    echo["seq_align"] = config.seq_align;
    echo["seed"] = config.seed;
    echo["trials"] = config.trials;
    echo["strategy"] = config.strategy;
    echo["tolerance_m"] = config.tolerance_m;
    echo["preprocess"] = config.preprocess;
    echo["speed_scale"] = config.speed_scale;
    return echo;
}

void write_text(const std::string& out_dir, const std::string& name,
                const std::function<void(std::ostream&)>& writer) {
    std::filesystem::create_directories(out_dir);
    auto out = detail::open_output(out_dir + "/" + name);
    writer(out);
}

}  // namespace

FrameSeries build_series(const EventStream& stream, const ExperimentConfig& config) {
    FrameSeries series;
    if (config.regime == "fixed_count") {
        series = build_frames_fixed_count(stream, config.n_events);
    } else {
        series = config.t0_us ? build_frames_fixed_time(stream, config.tau_us, *config.t0_us)
                              : build_frames_fixed_time(stream, config.tau_us);
        if (config.drop_partial) drop_trailing_partial(series);
    }
    return series;
}

namespace {

// Loading/synthesis and preprocessing only; frames and the selection pmf are
// added by prepare_inputs.
PipelineInputs prepare_streams(const ExperimentConfig& config) {
    PipelineInputs inputs;

    if (!config.ref_events.empty()) {
        const ParseOptions options{config.width, config.height, config.sort_slack_us};
        inputs.ref_events =
            load_events(config.ref_events, format_from_extension(config.ref_events), options);
        inputs.query_events = load_events(config.query_events,
                                          format_from_extension(config.query_events), options);
        if (!config.ref_track.empty()) {
            auto ref_in = detail::open_input(config.ref_track);
            inputs.ref_track = load_pose_track(ref_in);
        }
        if (!config.query_track.empty()) {
            auto query_in = detail::open_input(config.query_track);
            inputs.query_track = load_pose_track(query_in);
        }
    } else {
        auto [ref_stream, ref_track] = synth_generate(config.world, 1.0, config.ref_traverse);
        auto [query_stream, query_track] =
            synth_generate(config.world, config.speed_scale, config.query_traverse);
        inputs.ref_events = std::move(ref_stream);
        inputs.query_events = std::move(query_stream);
        inputs.ref_track = std::move(ref_track);
        inputs.query_track = std::move(query_track);
    }

    if (config.preprocess) {
        inputs.ref_events = remove_bursts(inputs.ref_events, config.burst_bin_us, config.burst_ratio);
        inputs.query_events =
            remove_bursts(inputs.query_events, config.burst_bin_us, config.burst_ratio);
        // The mask comes from the reference traverse and applies to both
        // streams, so descriptors stay comparable.
        inputs.mask = detect_hot_pixels(inputs.ref_events, config.hot_sigma);
        inputs.ref_events = filter_masked_events(inputs.ref_events, inputs.mask);
        inputs.query_events = filter_masked_events(inputs.query_events, inputs.mask);
    } else {
        inputs.mask = PixelMask(inputs.ref_events.width, inputs.ref_events.height);
    }
    return inputs;
}

}  // namespace

PipelineInputs prepare_inputs(const ExperimentConfig& config) {
    PipelineInputs inputs = prepare_streams(config);
    inputs.ref_frames = build_series(inputs.ref_events, config);
    inputs.query_frames = build_series(inputs.query_events, config);
    inputs.varmap = variance_map(inputs.ref_frames, inputs.mask);
    inputs.pmf = selection_pmf(inputs.varmap);
    return inputs;
}

PixelSet select_for_strategy(const PipelineInputs& inputs, const ExperimentConfig& config,
                             const std::string& strategy, std::uint64_t seed) {
    const std::uint16_t width = inputs.ref_frames.width;
    const std::uint16_t height = inputs.ref_frames.height;
    if (strategy == "variance")
        return select_pixels(inputs.pmf, config.num_pixels, config.sigma, seed);
    if (strategy == "random")
        return select_random_pixels(width, height, config.num_pixels, seed, std::nullopt,
                                    &inputs.mask);
    if (strategy == "random_no_bottom") {
        // The exclusion shrinks the domain; J sweeps that reach the full
        // sensor saturate at everything above the bottom third.
        const Rect excluded = bottom_third(width, height);
        std::size_t available = 0;
        for (std::uint16_t v = 0; v < excluded.v0; ++v)
            for (std::uint16_t u = 0; u < width; ++u)
                if (!inputs.mask.is_masked(u, v)) ++available;
        return select_random_pixels(width, height, std::min(config.num_pixels, available), seed,
                                    excluded, &inputs.mask);
    }
    throw Error(ErrorCode::config_error, "unknown strategy: " + strategy);
}

namespace {

MatchResult evaluate_matrix(DistanceMatrix&& seq, const FrameSeries& ref_frames,
                            const FrameSeries& query_frames, const PoseTrack& ref_track,
                            const PoseTrack& query_track, const ExperimentConfig& config) {
    MatchResult result;
    result.seq = std::move(seq);
    if (!ref_track.empty() && !query_track.empty()) {
        const GroundTruth gt = associate_ground_truth(ref_track, query_track, ref_frames,
                                                      query_frames, config.tolerance_m);
        result.curve = pr_curve(result.seq, gt);
        result.p_at_100r = result.curve.p_at_100r;
        result.r_at_99p = result.curve.r_at_99p;
        result.evaluated = true;
    }
    return result;
}

}  // namespace

MatchResult match_and_eval(const FrameSeries& ref_frames, const FrameSeries& query_frames,
                           const PoseTrack& ref_track, const PoseTrack& query_track,
                           const PixelSet& pixels, const ExperimentConfig& config) {
    const auto ref_desc = sparse_descriptors(ref_frames, pixels);
    const auto query_desc = sparse_descriptors(query_frames, pixels);
    DistanceMatrix raw = distance_matrix(query_desc, ref_desc);
    DistanceMatrix seq = sequence_convolve(raw, config.seq_len, seq_align_from_config(config));
    return evaluate_matrix(std::move(seq), ref_frames, query_frames, ref_track, query_track,
                           config);
}

MatchResult match_and_eval_dense(const FrameSeries& ref_frames, const FrameSeries& query_frames,
                                 const PoseTrack& ref_track, const PoseTrack& query_track,
                                 const ExperimentConfig& config) {
    DistanceMatrix raw = dense_sad_matrix(query_frames, ref_frames);
    DistanceMatrix seq = sequence_convolve(raw, config.seq_len, seq_align_from_config(config));
    return evaluate_matrix(std::move(seq), ref_frames, query_frames, ref_track, query_track,
                           config);
}

Json run_pipeline(const ExperimentConfig& config) {
    validate_config(config);
    validate_pair_inputs(config);

    const PipelineInputs inputs = prepare_inputs(config);

    PixelSet pixels;
    if (!config.pixels_file.empty()) {
        auto in = detail::open_input(config.pixels_file);
        pixels = load_pixel_set(in);
    } else {
        pixels = select_for_strategy(inputs, config, config.strategy, config.seed);
    }

    const MatchResult sparse = match_and_eval(inputs.ref_frames, inputs.query_frames,
                                              inputs.ref_track, inputs.query_track, pixels, config);

    Json report;
    report["config"] = config_echo(config);
    report["mask_pixels"] = inputs.mask.count();
    report["ref_events"] = inputs.ref_events.size();
    report["query_events"] = inputs.query_events.size();
    report["ref_frames"] = inputs.ref_frames.size();
    report["query_frames"] = inputs.query_frames.size();
    report["ref_remainder_dropped"] = inputs.ref_frames.remainder_dropped;
    report["query_remainder_dropped"] = inputs.query_frames.remainder_dropped;
    report["num_pixels"] = pixels.size();
    if (sparse.evaluated) {
        report["p_at_100r"] = sparse.p_at_100r;
        report["r_at_99p"] = sparse.r_at_99p;
        report["n_queries"] = sparse.curve.num_queries;
    }

    if (config.dense) {
        const MatchResult dense =
            match_and_eval_dense(inputs.ref_frames, inputs.query_frames, inputs.ref_track,
                                 inputs.query_track, config);
        if (dense.evaluated) {
            report["dense_p_at_100r"] = dense.p_at_100r;
            report["dense_r_at_99p"] = dense.r_at_99p;
        }
    }

    if (!config.out_dir.empty()) {
        write_text(config.out_dir, "pixels.csv",
                   [&](std::ostream& out) { save_pixel_set(pixels, out); });
        write_text(config.out_dir, "variance.csv",
                   [&](std::ostream& out) { save_variance_map(inputs.varmap, out); });
        write_text(config.out_dir, "mask.csv",
                   [&](std::ostream& out) { save_mask(inputs.mask, out); });
        write_text(config.out_dir, "distances.csv",
                   [&](std::ostream& out) { save_distance_matrix_csv(sparse.seq, out); });
        {
            std::filesystem::create_directories(config.out_dir);
            auto out = detail::open_output(config.out_dir + "/distances.dmat", true);
            save_distance_matrix(sparse.seq, out);
        }
        if (sparse.evaluated) {
            write_text(config.out_dir, "pr_curve.csv",
                       [&](std::ostream& out) { save_pr_curve_csv(sparse.curve, out); });
            write_text(config.out_dir, "summary.json",
                       [&](std::ostream& out) { save_pr_summary_json(sparse.curve, out); });
        }
        write_report(report, config.out_dir, "report.json");
    }
    return report;
}

Json experiment_selection_compare(const ExperimentConfig& config) {
    validate_config(config);
    validate_pair_inputs(config);
    const PipelineInputs inputs = prepare_inputs(config);
    require_tracks(inputs);

    const std::vector<std::string> strategies = {"variance", "random", "random_no_bottom"};
    struct Cell {
        std::string strategy;
        std::size_t j;
        std::uint64_t seed;
        double p_at_100r = 0.0;
        double r_at_99p = 0.0;
    };
    std::vector<Cell> cells;
    for (const std::string& strategy : strategies)
        for (std::size_t j : config.j_grid)
            for (std::size_t trial = 0; trial < config.trials; ++trial)
                cells.push_back({strategy, j, config.seed + trial, 0.0, 0.0});

    parallel_cells(static_cast<std::int64_t>(cells.size()), [&](std::size_t i) {
        Cell& cell = cells[i];
        ExperimentConfig cell_config = config;
        cell_config.num_pixels = cell.j;
        const PixelSet pixels = select_for_strategy(inputs, cell_config, cell.strategy, cell.seed);
        const MatchResult result =
            match_and_eval(inputs.ref_frames, inputs.query_frames, inputs.ref_track,
                           inputs.query_track, pixels, cell_config);
        cell.p_at_100r = result.p_at_100r;
        cell.r_at_99p = result.r_at_99p;
    });

    Json report;
    report["config"] = config_echo(config);
    report["j_grid"] = config.j_grid;
    Json cell_rows = Json::array();
    for (const Cell& cell : cells)
        cell_rows.push_back({{"strategy", cell.strategy},
                             {"j", cell.j},
                             {"seed", cell.seed},
                             {"p_at_100r", cell.p_at_100r},
                             {"r_at_99p", cell.r_at_99p}});
    report["cells"] = cell_rows;

    Json aggregates = Json::array();
    for (const std::string& strategy : strategies)
        for (std::size_t j : config.j_grid) {
            std::vector<double> p100r, r99p;
            for (const Cell& cell : cells)
                if (cell.strategy == strategy && cell.j == j) {
                    p100r.push_back(cell.p_at_100r);
                    r99p.push_back(cell.r_at_99p);
                }
            aggregates.push_back({{"strategy", strategy},
                                  {"j", j},
                                  {"mean_p_at_100r", mean_of(p100r)},
                                  {"std_p_at_100r", sample_std(p100r)},
                                  {"mean_r_at_99p", mean_of(r99p)},
                                  {"std_r_at_99p", sample_std(r99p)}});
        }
    report["aggregates"] = aggregates;

    if (!config.out_dir.empty()) {
        write_text(config.out_dir, "selection_compare.csv", [&](std::ostream& out) {
            out << "strategy,j,mean_p_at_100r,std_p_at_100r,mean_r_at_99p,std_r_at_99p\n";
            for (const Json& row : aggregates)
                out << row["strategy"].get<std::string>() << ',' << row["j"] << ','
                    << row["mean_p_at_100r"] << ',' << row["std_p_at_100r"] << ','
                    << row["mean_r_at_99p"] << ',' << row["std_r_at_99p"] << '\n';
        });
        write_report(report, config.out_dir, "selection_compare.json");
    }
    return report;
}

Json experiment_pixel_shift(const ExperimentConfig& config) {
    validate_config(config);
    validate_pair_inputs(config);
    const PipelineInputs inputs = prepare_inputs(config);
    require_tracks(inputs);

    std::vector<std::pair<int, int>> offsets;
    for (int dv = -config.shift_vmax; dv <= config.shift_vmax; dv += config.shift_step)
        for (int du = -config.shift_umax; du <= config.shift_umax; du += config.shift_step)
            offsets.emplace_back(du, dv);

    std::vector<PixelSet> selections;
    for (std::size_t trial = 0; trial < config.trials; ++trial)
        selections.push_back(
            select_for_strategy(inputs, config, config.strategy, config.seed + trial));

    struct OffsetResult {
        int du = 0, dv = 0;
        double dense_p_at_100r = 0.0;
        std::vector<double> sparse_p_at_100r;
    };
    std::vector<OffsetResult> results(offsets.size());

    parallel_cells(static_cast<std::int64_t>(offsets.size()), [&](std::size_t i) {
        const auto [du, dv] = offsets[i];
        const FrameSeries shifted = shift_pixels(inputs.query_frames, du, dv);
        OffsetResult& res = results[i];
        res.du = du;
        res.dv = dv;
        res.dense_p_at_100r = match_and_eval_dense(inputs.ref_frames, shifted, inputs.ref_track,
                                                   inputs.query_track, config)
                                  .p_at_100r;
        for (const PixelSet& pixels : selections)
            res.sparse_p_at_100r.push_back(match_and_eval(inputs.ref_frames, shifted,
                                                          inputs.ref_track, inputs.query_track,
                                                          pixels, config)
                                               .p_at_100r);
    });

    Json report;
    report["config"] = config_echo(config);
    Json rows = Json::array();
    for (const OffsetResult& res : results)
        rows.push_back({{"du", res.du},
                        {"dv", res.dv},
                        {"dense_p_at_100r", res.dense_p_at_100r},
                        {"sparse_p_at_100r", res.sparse_p_at_100r},
                        {"mean_sparse_p_at_100r", mean_of(res.sparse_p_at_100r)},
                        {"std_sparse_p_at_100r", sample_std(res.sparse_p_at_100r)}});
    report["offsets"] = rows;

    if (!config.out_dir.empty()) {
        write_text(config.out_dir, "pixel_shift.csv", [&](std::ostream& out) {
            out << "du,dv,mean_sparse_p_at_100r,std_sparse_p_at_100r,dense_p_at_100r\n";
            for (const Json& row : rows)
                out << row["du"] << ',' << row["dv"] << ',' << row["mean_sparse_p_at_100r"] << ','
                    << row["std_sparse_p_at_100r"] << ',' << row["dense_p_at_100r"] << '\n';
        });
        write_report(report, config.out_dir, "pixel_shift.json");
    }
    return report;
}

Json experiment_velocity_warp(const ExperimentConfig& config) {
    std::vector<std::uint64_t> n_values = config.n_grid;
    if (n_values.empty() && config.n_events > 0) n_values.push_back(config.n_events);
    if (n_values.empty())
        throw Error(ErrorCode::config_error, "velocity experiment needs n_events or n_grid");

    ExperimentConfig base = config;
    base.regime = "fixed_count";  // the streams are framed per sweep entry below
    base.n_events = n_values.front();
    validate_config(base);
    validate_pair_inputs(base);

    // Preprocess only; frames are rebuilt per N.
    const PipelineInputs inputs = prepare_streams(base);
    require_tracks(inputs);

    Json sweep = Json::array();
    for (const std::uint64_t n : n_values) {
        FrameSeries ref_n = build_frames_fixed_count(inputs.ref_events, n);
        FrameSeries query_n = build_frames_fixed_count(inputs.query_events, n);
        if (ref_n.size() < config.seq_len || query_n.size() < config.seq_len)
            throw Error(ErrorCode::config_error,
                        "N=" + std::to_string(n) + " yields fewer than seq_len frames");

        // Matched control: one fixed time window as long as the average
        // effective window of the fixed-N reference frames.
        const std::uint64_t tau_matched =
            std::max<std::uint64_t>(1, inputs.ref_events.duration_us() / ref_n.size());
        ExperimentConfig tau_config = base;
        tau_config.regime = "fixed_time";
        tau_config.tau_us = tau_matched;
        FrameSeries ref_t = build_frames_fixed_time(inputs.ref_events, tau_matched);
        FrameSeries query_t = build_frames_fixed_time(inputs.query_events, tau_matched);
        if (config.drop_partial) {
            drop_trailing_partial(ref_t);
            drop_trailing_partial(query_t);
        }

        const VarianceMap var_t = variance_map(ref_t, inputs.mask);
        const SelectionPmf pmf_t = selection_pmf(var_t);

        std::vector<double> p100r_fixed_n(config.trials), p100r_fixed_tau(config.trials);
        parallel_cells(static_cast<std::int64_t>(config.trials), [&](std::size_t trial) {
            // One subset per trial, shared between the two regimes.
            const PixelSet pixels =
                select_pixels(pmf_t, config.num_pixels, config.sigma, config.seed + trial);
            p100r_fixed_n[trial] = match_and_eval(ref_n, query_n, inputs.ref_track,
                                                  inputs.query_track, pixels, base)
                                       .p_at_100r;
            p100r_fixed_tau[trial] = match_and_eval(ref_t, query_t, inputs.ref_track,
                                                    inputs.query_track, pixels, tau_config)
                                         .p_at_100r;
        });

        sweep.push_back({{"n", n},
                         {"tau_matched_us", tau_matched},
                         {"ref_frames_fixed_n", ref_n.size()},
                         {"query_frames_fixed_n", query_n.size()},
                         {"fixed_n_p_at_100r", p100r_fixed_n},
                         {"fixed_n_mean", mean_of(p100r_fixed_n)},
                         {"fixed_n_std", sample_std(p100r_fixed_n)},
                         {"fixed_tau_p_at_100r", p100r_fixed_tau},
                         {"fixed_tau_mean", mean_of(p100r_fixed_tau)},
                         {"fixed_tau_std", sample_std(p100r_fixed_tau)}});
    }

    Json report;
    report["config"] = config_echo(config);
    report["speed_scale"] = config.speed_scale;
    report["sweep"] = sweep;

    if (!config.out_dir.empty()) {
        write_text(config.out_dir, "velocity.csv", [&](std::ostream& out) {
            out << "n,tau_matched_us,fixed_n_mean,fixed_n_std,fixed_tau_mean,fixed_tau_std\n";
            for (const Json& row : sweep)
                out << row["n"] << ',' << row["tau_matched_us"] << ',' << row["fixed_n_mean"]
                    << ',' << row["fixed_n_std"] << ',' << row["fixed_tau_mean"] << ','
                    << row["fixed_tau_std"] << '\n';
        });
        write_report(report, config.out_dir, "velocity.json");
    }
    return report;
}

Json bench_runtime(const ExperimentConfig& config) {
    validate_config(config);
    using Clock = std::chrono::steady_clock;

    const std::uint16_t width = config.width;
    const std::uint16_t height = config.height;
    const std::size_t num_refs = std::max<std::size_t>(1, config.bench_frames);
    const std::size_t num_queries = std::max<std::size_t>(1, config.bench_queries);
    const std::size_t runs = std::max<std::size_t>(1, config.bench_runs);

    Rng rng(config.seed);
    const auto make_series = [&](std::size_t count) {
        FrameSeries series;
        series.width = width;
        series.height = height;
        series.regime = AccumRegime::fixed_time(1000000);
        series.frames.resize(count);
        for (std::size_t k = 0; k < count; ++k) {
            EventFrame& frame = series.frames[k];
            frame.width = width;
            frame.height = height;
            frame.t_start = k * 1000000ull;
            frame.t_end = (k + 1) * 1000000ull;
            frame.counts.resize(std::size_t(width) * height);
            for (std::uint32_t& c : frame.counts)
                c = static_cast<std::uint32_t>(rng.below(32));
        }
        return series;
    };
    const FrameSeries refs = make_series(num_refs);
    const FrameSeries queries = make_series(num_queries);

    const PixelSet pixels =
        select_random_pixels(width, height, config.num_pixels, config.seed);
    const auto ref_desc = sparse_descriptors(refs, pixels);
    const auto query_desc = sparse_descriptors(queries, pixels);

    const auto time_ms = [](auto&& fn) {
        const auto t0 = Clock::now();
        fn();
        const auto t1 = Clock::now();
        return std::chrono::duration<double, std::milli>(t1 - t0).count();
    };

    std::vector<double> sparse_ms(runs), dense_ms(runs);
    volatile double sink = 0.0;
    for (std::size_t run = 0; run < runs; ++run) {
        sparse_ms[run] = time_ms([&] {
            const DistanceMatrix d = distance_matrix(query_desc, ref_desc);
            sink = sink + d.d[0];
        });
        dense_ms[run] = time_ms([&] {
            const DistanceMatrix d = dense_sad_matrix(queries, refs);
            sink = sink + d.d[0];
        });
    }
    const auto median = [](std::vector<double> xs) {
        std::sort(xs.begin(), xs.end());
        const std::size_t n = xs.size();
        return n % 2 == 1 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
    };
    const double sparse_med = median(sparse_ms);
    const double dense_med = median(dense_ms);

    Json report;
    report["width"] = width;
    report["height"] = height;
    report["dense_pixels"] = std::size_t(width) * height;
    report["sparse_pixels"] = pixels.size();
    report["bench_frames"] = num_refs;
    report["bench_queries"] = num_queries;
    report["runs"] = runs;
    report["sparse_matrix_ms_median"] = sparse_med;
    report["dense_matrix_ms_median"] = dense_med;
    report["sparse_row_ms_median"] = sparse_med / double(num_queries);
    report["dense_row_ms_median"] = dense_med / double(num_queries);
    report["speedup"] = sparse_med > 0.0 ? dense_med / sparse_med : 0.0;
    if (num_refs < 2 || sparse_med < 0.05)
        report["warning"] = "sparse timing is near timer resolution; increase bench_frames";

    if (!config.out_dir.empty()) write_report(report, config.out_dir, "bench.json");
    return report;
}

void write_report(const Json& report, const std::string& out_dir, const std::string& name) {
    std::filesystem::create_directories(out_dir);
    auto out = detail::open_output(out_dir + "/" + name);
    out << report.dump(2) << '\n';
}

}  // namespace sevpr
