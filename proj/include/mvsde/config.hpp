#pragma once

// Run configuration: `key = value` lines with dotted keys, `#` comments.
// Command-line overrides are applied on top of the file, then every key is
// type-checked and range-checked before anything runs.

#include "mvsde/engine.hpp"
#include "mvsde/model.hpp"
#include "mvsde/solver.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace mvsde {

using KeyValues = std::vector<std::pair<std::string, std::string>>;

struct KeyInfo {
    const char* key;
    const char* default_value;
    const char* help;
};

// Every accepted key with its default, in manifest order.
[[nodiscard]] const std::vector<KeyInfo>& config_keys();

[[nodiscard]] const std::vector<std::string>& subcommands();

struct RunConfig {
    std::string command;

    std::string model_name;
    double a = 0.0, c = 0.0, sigma0 = 0.0, kappa = 0.0, theta = 0.0, beta = 0.0, delay_location = 0.0;
    std::optional<double> K_b, K_B, K_sigma, alpha, p;

    SimConfig sim;
    InitialLaw init;

    std::vector<std::size_t> N_list;
    std::size_t replicas = 0;
    std::size_t reference_M = 0;
    SolverOptions solver;
    std::vector<std::size_t> tv_N_list;
    std::size_t tv_replicas = 0;
    std::vector<double> tv_times;
    double tv_bin_width = 0.0;
    double yamada_epsilon = 0.0;
    std::size_t yamada_points = 0;
    AuditSpec audit;
    int mollify_n = 0;
    std::string output_format;

    std::string out_dir;
    int threads = 0;

    // Effective value of every key, defaults included.
    KeyValues values;
    std::vector<std::string> warnings;
};

// Parses `key = value` text. Unknown keys and malformed lines are errors.
[[nodiscard]] KeyValues parse_key_values(const std::string& text, const std::string& source = "config");

[[nodiscard]] RunConfig parse_config(const std::string& command, const KeyValues& file,
                                     const KeyValues& overrides = {});
[[nodiscard]] RunConfig parse_config_file(const std::string& command, const std::string& path,
                                          const KeyValues& overrides = {});

// The zoo model named by the config with declared-constant overrides applied.
[[nodiscard]] ModelSpec build_model(const RunConfig& config);

// Config echo that reproduces the run when fed back as a config file.
[[nodiscard]] std::string manifest_text(const RunConfig& config);

}  // namespace mvsde
