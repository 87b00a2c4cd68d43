#pragma once

#include "ult/init.hpp"
#include "ult/net.hpp"

#include <cstdint>
#include <vector>

namespace ult {

constexpr double path_alpha = 0.75;

struct path_record {
    std::vector<int> layers;  // layer of each path neuron
    std::vector<int> neurons; // neuron (row) index per layer
    std::vector<double> weights;
    double product = 1.0;
    bool ok = false;
};

// Lemma 1 acceptance: w in [1/p, 1/(alpha p)].
bool path_accepts(double w, double running_product);

// [1, 1/alpha] up to a few ulps of rounding in the running product.
bool path_product_in_range(double p);

// Walks from `start_neuron` in from_layer up to to_layer, scanning at most
// budget_per_layer unclaimed candidates per layer in index order. Weights are
// read in the canonical sigma = 2 frame. `claimed`, if given, is indexed
// [layer][neuron] and is updated on success.
path_record find_path(const mother_net& net, int from_layer, int to_layer, int budget_per_layer,
                      int start_neuron = 0, std::vector<std::vector<char>>* claimed = nullptr);

struct path_sim_result {
    std::vector<long> scanned;  // per step
    std::vector<long> accepted; // per step
    long paths = 0;
    long completed = 0;
    double min_product = 0, max_product = 0;
    bool products_in_range = true;

    double step_frequency(int step) const;
};

// Monte Carlo of the Lemma 1 induction with fresh canonical weights
// (U[-2,2] or N(0,4)) at each step.
path_sim_result simulate_paths(init_family family, int steps, long trials, int budget_per_step, std::uint64_t seed);

} // namespace ult
