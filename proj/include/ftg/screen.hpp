#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace ftg {

struct ScreenConfig {
    std::size_t n_inputs = 500;
    std::size_t max_input_len = 4096;
    std::uint64_t rng_seed = 0;
    int jobs = 1;
    bool keep_seeds = true;  // write surviving inputs as seed files
};

struct TargetScreenResult {
    std::string name;
    std::size_t clean = 0;    // inputs with a normal zero exit
    std::size_t crashed = 0;  // nonzero exit or abnormal termination
    bool valid = false;       // at least one input survived
};

struct ScreenReport {
    std::vector<TargetScreenResult> targets;  // sorted by name
    std::size_t valid_count = 0;
    std::size_t invalid_count = 0;
};

/// Runs every built target under targets_dir on random byte buffers piped to
/// stdin. A target that crashes on every input is flagged invalid; surviving
/// inputs are written to seeds/<target>/<index>.bin. Targets may execute in
/// parallel up to config.jobs. Throws ScreenSetupError when the directory
/// holds no executable targets.
ScreenReport run_screen(const std::string& targets_dir, const ScreenConfig& config);

std::string format_screen_report(const ScreenReport& report);

/// Feeds `input` to the executable's stdin and reaps it. Zero = clean exit.
/// Exposed for tests.
int execute_with_input(const std::string& exe_path, const std::vector<std::uint8_t>& input);

}  // namespace ftg
