#pragma once

#include "ult/init.hpp"
#include "ult/net.hpp"

#include <random>
#include <vector>

namespace testing_util {

inline ult::architecture dense_arch(std::vector<int> widths, ult::activation out = ult::activation::identity) {
    ult::architecture a;
    a.widths = std::move(widths);
    a.kinds.assign(a.widths.size() - 1, ult::layer_kind::dense);
    a.output_activation = out;
    return a;
}

inline ult::architecture shared_arch(std::vector<int> widths, ult::activation out = ult::activation::identity) {
    auto a = dense_arch(std::move(widths), out);
    a.kinds.assign(a.widths.size() - 1, ult::layer_kind::shared);
    return a;
}

inline ult::mother_net random_net(const ult::architecture& a, std::uint64_t seed, double sigma = 2.0) {
    ult::init_spec s;
    s.sigma_w.assign(a.kinds.size(), sigma);
    s.seed = seed;
    s.bias = ult::bias_convention::per_layer;
    return ult::sample(a, s);
}

inline std::vector<double> random_point(int d, std::mt19937_64& g, double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> x(static_cast<std::size_t>(d));
    for (auto& v : x) v = u(g);
    return x;
}

} // namespace testing_util
