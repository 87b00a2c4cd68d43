#pragma once

#include "ult/families.hpp"
#include "ult/init.hpp"
#include "ult/net.hpp"
#include "ult/prune.hpp"
#include "ult/subsum.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ult {

struct subsetsum_experiment {
    std::vector<distribution> distributions;
    std::vector<int> n;
    std::vector<double> eps;
    std::vector<double> delta; // reported alongside each row
    double m = 1.0;
    int trials = 1000;
    solve_strategy strategy = solve_strategy::best_k;
    int max_subset = 5;
};

struct paths_experiment {
    std::vector<init_family> families;
    int steps = 6;
    long trials = 10000;
    int budget = 160;
};

struct linear_experiment {
    linear_target target;
};

struct thresholds {
    std::optional<double> median_error;
    std::optional<double> fraction_lo, fraction_hi;
    std::optional<double> runtime_s;
    std::optional<double> min_success_rate;
    std::optional<double> min_universality; // fraction of combos with residual <= family eps
};

struct universality_check {
    int combos = 0; // 0 disables
    long fit_grid = 41;
    long eval_grid = 301;
};

struct experiment_config {
    std::string name;     // poly | fourier | subsetsum | paths | linear
    std::string version;  // free-form config tag
    std::string source;   // file the config was read from

    init_spec init;       // seed is replaced per run
    architecture mother;
    bool has_mother = false;

    poly_family_spec poly;
    fourier_family_spec fourier;
    linear_experiment linear;
    subsetsum_experiment subsetsum;
    paths_experiment paths;

    prune_options prune;
    double eps = 0.01;    // pruning error threshold for linear and reproduction runs
    double delta = 0.1;

    int seeds = 1;
    std::uint64_t master_seed = 0;
    long grid = 10000;    // probes per input dimension
    std::string calibration_file;
    std::string out_dir = "out";
    thresholds accept;
    universality_check universality;
};

// Errors carry "file:line: message" diagnostics.
experiment_config load_config(const std::string& path);
experiment_config parse_config(const std::string& text, const std::string& source = "<string>");

} // namespace ult
