#include "sevpr/config.hpp"

#include <filesystem>

namespace sevpr {

namespace {

void require(bool condition, const std::string& message) {
    if (!condition) throw Error(ErrorCode::config_error, message);
}

void require_file(const std::string& path, const char* key) {
    if (path.empty()) return;
    require(std::filesystem::exists(path), std::string(key) + " does not exist: " + path);
}

}  // namespace

void validate_config(const ExperimentConfig& config) {
    require(config.width > 0 && config.height > 0, "sensor geometry must be positive");
    require(config.regime == "fixed_time" || config.regime == "fixed_count",
            "regime must be fixed_time or fixed_count");
    if (config.regime == "fixed_time")
        require(config.tau_us > 0, "tau_us must be positive");
    else
        require(config.n_events > 0, "n_events is required for the fixed_count regime");
    require(config.num_pixels > 0, "num_pixels must be positive");
    require(config.sigma > 0.0, "sigma must be positive");
    require(config.trials >= 1, "trials must be at least 1");
    require(config.strategy == "variance" || config.strategy == "random" ||
                config.strategy == "random_no_bottom",
            "strategy must be variance, random or random_no_bottom");
    require(config.seq_len >= 1 && config.seq_len % 2 == 1, "seq_len must be odd and positive");
    require(config.seq_align == "centered" || config.seq_align == "trailing",
            "seq_align must be centered or trailing");
    require(config.tolerance_m >= 0.0, "tolerance_m must be non-negative");
    require(config.hot_sigma > 0.0, "hot_sigma must be positive");
    require(config.burst_bin_us > 0, "burst_bin_us must be positive");
    require(config.burst_ratio > 1.0, "burst_ratio must exceed 1");
    require(config.speed_scale > 0.0, "speed_scale must be positive");
    require(config.shift_step >= 1, "shift_step must be at least 1");
    require(config.shift_umax >= 0 && config.shift_vmax >= 0,
            "shift ranges must be non-negative");

    require_file(config.ref_events, "ref_events");
    require_file(config.query_events, "query_events");
    require_file(config.ref_track, "ref_track");
    require_file(config.query_track, "query_track");
    require_file(config.pixels_file, "pixels_file");
    require_file(config.dmat_file, "dmat_file");

    for (std::size_t j : config.j_grid) require(j > 0, "j_grid entries must be positive");
    for (std::uint64_t n : config.n_grid) require(n > 0, "n_grid entries must be positive");
}

void validate_pair_inputs(const ExperimentConfig& config) {
    const bool ref_from_file = !config.ref_events.empty();
    const bool query_from_file = !config.query_events.empty();
    require(ref_from_file == query_from_file,
            "provide both ref_events and query_events, or neither (synthetic mode)");
    if (!ref_from_file) {
        require(config.world.route_m > 0.0, "synth route_m must be positive");
        require(config.world.step_m > 0.0, "synth step_m must be positive");
        require(config.world.speed_mps > 0.0, "synth speed_mps must be positive");
    }
    // Shift offsets are validated against the effective sensor.
    const std::uint16_t width = ref_from_file ? config.width : config.world.width;
    const std::uint16_t height = ref_from_file ? config.height : config.world.height;
    require(config.shift_umax < width && config.shift_vmax < height,
            "shift offsets exceed sensor bounds");
}

AccumRegime regime_from_config(const ExperimentConfig& config) {
    if (config.regime == "fixed_time") return AccumRegime::fixed_time(config.tau_us);
    return AccumRegime::fixed_count(config.n_events);
}

SeqAlign seq_align_from_config(const ExperimentConfig& config) {
    return config.seq_align == "trailing" ? SeqAlign::trailing : SeqAlign::centered;
}

}  // namespace sevpr
