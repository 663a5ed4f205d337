#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

namespace rcdepth {

/// Tool configuration: loss hyperparameters and demo settings. Loaded from a
/// key=value text file, overridden by command-line flags (flags win).
struct Config {
    double beta = 1.0;
    std::array<double, 4> gamma{1.0, 1.0, 1.0, 1.0};
    bool detach_u = true;
    std::vector<double> caps{50.0, 70.0, 80.0};
    std::size_t demo_resolution = 32;
    std::size_t demo_steps = 240;
    double demo_lr = 0.004;
    std::uint64_t demo_seed = 0;
    std::size_t demo_train_scenes = 2;
    std::size_t demo_eval_scenes = 2;
    std::size_t demo_eval_every = 40;
};

/// Parses a key=value file ('#' starts a comment, blank lines ignored).
/// Unknown keys are rejected with ConfigError.
Config load_config_file(const std::filesystem::path& path);

/// Applies a single key=value assignment onto an existing config.
void apply_config_entry(Config& config, const std::string& key,
                        const std::string& value);

/// Canonical echo of every key; re-parsing the output reproduces the config
/// exactly.
void print_config(std::ostream& out, const Config& config);

}  // namespace rcdepth
