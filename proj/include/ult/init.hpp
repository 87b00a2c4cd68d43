#pragma once

#include "ult/net.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace ult {

enum class init_family { uniform, normal };

// definition: layer-l bias scale prod_{k<=l} sigma_k / 2.
// per_layer:  layer-l bias scale prod_{k<=l} (sigma_k / 2), which keeps every
//             layer at U[-1,1] (or N(0,1)) in the sigma = 2 frame.
enum class bias_convention { definition, per_layer };

std::string to_string(init_family f);
std::string to_string(bias_convention b);
init_family parse_init_family(const std::string& s);
bias_convention parse_bias_convention(const std::string& s);

struct init_spec {
    init_family family = init_family::uniform;
    std::vector<double> sigma_w;
    std::uint64_t seed = 0;
    bias_convention bias = bias_convention::definition;

    void validate() const;
};

// Half-width (uniform) or standard deviation (normal) of the layer-l biases, l 1-based.
double bias_scale(const init_spec& spec, int l);

// Weights: U[-s, s] or N(0, s^2). Each layer draws from its own substream.
mother_net sample(const architecture& arch, const init_spec& spec);

double lambda_factor(const init_spec& spec, int L);

} // namespace ult
