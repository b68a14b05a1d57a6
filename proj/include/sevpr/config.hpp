#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sevpr/common.hpp"
#include "sevpr/synth.hpp"

namespace sevpr {

/// Everything a run needs, filled from defaults, a flat key=value config file
/// and CLI flags of the same names (CLI wins).
struct ExperimentConfig {
    // Input files. When the event paths are empty, experiment runners build a
    // synthetic world from the synth_* parameters instead.
    std::string ref_events;
    std::string query_events;
    std::string ref_track;
    std::string query_track;
    std::string pixels_file;  // reuse a previously exported selection
    std::string dmat_file;    // eval input

    std::uint16_t width = 346;
    std::uint16_t height = 260;
    std::uint64_t sort_slack_us = 0;

    bool preprocess = true;
    double hot_sigma = 5.0;
    std::uint64_t burst_bin_us = 1000;
    double burst_ratio = 10.0;

    std::string regime = "fixed_time";  // fixed_time | fixed_count
    std::uint64_t tau_us = 1000000;
    std::uint64_t n_events = 0;  // required for fixed_count
    std::optional<std::uint64_t> t0_us;
    bool drop_partial = true;

    std::size_t num_pixels = 150;  // J
    double sigma = 7.0;
    std::uint64_t seed = 42;
    std::size_t trials = 5;
    std::string strategy = "variance";  // variance | random | random_no_bottom

    std::uint32_t seq_len = 5;  // L
    std::string seq_align = "centered";  // centered | trailing
    bool dense = false;  // additionally run the all-pixel baseline

    double tolerance_m = 3.0;

    SynthWorld world;
    double speed_scale = 1.0;
    std::uint64_t ref_traverse = 0;    // synthetic repeat-pass realizations
    std::uint64_t query_traverse = 0;

    std::vector<std::size_t> j_grid = {10, 25, 50, 100, 150};
    int shift_umax = 10;
    int shift_vmax = 0;
    int shift_step = 1;
    std::vector<std::uint64_t> n_grid;  // velocity sweep; empty -> {n_events}

    std::size_t bench_frames = 500;
    std::size_t bench_queries = 20;
    std::size_t bench_runs = 10;

    std::string out_dir;  // empty -> no artifacts written
};

/// Checks shared by every runner: positive window parameters, trials >= 1,
/// referenced files exist, enum-like strings valid, shift offsets inside the
/// sensor. Throws Error(config_error).
void validate_config(const ExperimentConfig& config);

/// Extra checks for runners that need a query/reference pair or synth world.
void validate_pair_inputs(const ExperimentConfig& config);

AccumRegime regime_from_config(const ExperimentConfig& config);
SeqAlign seq_align_from_config(const ExperimentConfig& config);

}  // namespace sevpr
