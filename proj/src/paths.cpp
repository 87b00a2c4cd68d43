#include "ult/paths.hpp"

#include "ult/errors.hpp"
#include "ult/rng.hpp"

#include <algorithm>
#include <limits>

namespace ult {

bool path_accepts(double w, double running_product) {
    return w >= 1.0 / running_product && w <= 1.0 / (path_alpha * running_product);
}

bool path_product_in_range(double p) {
    constexpr double tol = 1e-12;
    return p >= 1.0 - tol && p <= 1.0 / path_alpha + tol;
}

path_record find_path(const mother_net& net, int from_layer, int to_layer, int budget_per_layer, int start_neuron,
                      std::vector<std::vector<char>>* claimed) {
    if (to_layer <= from_layer) throw domain_error("find_path needs to_layer > from_layer");
    if (budget_per_layer < 1) throw domain_error("find_path needs a positive budget");
    if (from_layer < 0 || to_layer > net.depth()) throw domain_error("find_path layers out of range");
    path_record rec;
    rec.layers.push_back(from_layer);
    rec.neurons.push_back(start_neuron);
    int prev = start_neuron;
    double p = 1.0;
    for (int l = from_layer + 1; l <= to_layer; ++l) {
        const auto& ly = net.at(l);
        const double canon = 2.0 / net.sigma_w()[static_cast<std::size_t>(l - 1)];
        if (prev >= ly.cols) throw shape_error("path neuron outside layer input range");
        int scanned = 0;
        int found = -1;
        for (int r = 0; r < ly.rows && scanned < budget_per_layer; ++r) {
            if (claimed && (*claimed)[static_cast<std::size_t>(l)][static_cast<std::size_t>(r)]) continue;
            ++scanned;
            if (path_accepts(canon * ly.weight(r, prev), p)) {
                found = r;
                break;
            }
        }
        if (found < 0) return rec;
        const double w = canon * ly.weight(found, prev);
        p *= w;
        rec.layers.push_back(l);
        rec.neurons.push_back(found);
        rec.weights.push_back(w);
        prev = found;
    }
    rec.product = p;
    rec.ok = true;
    if (claimed)
        for (std::size_t k = 1; k < rec.layers.size(); ++k)
            (*claimed)[static_cast<std::size_t>(rec.layers[k])][static_cast<std::size_t>(rec.neurons[k])] = 1;
    return rec;
}

double path_sim_result::step_frequency(int step) const {
    const auto s = static_cast<std::size_t>(step);
    return scanned[s] == 0 ? 0.0 : static_cast<double>(accepted[s]) / static_cast<double>(scanned[s]);
}

path_sim_result simulate_paths(init_family family, int steps, long trials, int budget_per_step, std::uint64_t seed) {
    path_sim_result out;
    out.scanned.assign(static_cast<std::size_t>(steps), 0);
    out.accepted.assign(static_cast<std::size_t>(steps), 0);
    out.min_product = std::numeric_limits<double>::infinity();
    out.max_product = -std::numeric_limits<double>::infinity();
    out.paths = trials;
    for (long t = 0; t < trials; ++t) {
        auto g = make_stream(seed, {fnv1a("lemma1"), static_cast<std::uint64_t>(t)});
        std::uniform_real_distribution<double> uni(-2.0, 2.0);
        std::normal_distribution<double> nor(0.0, 2.0);
        double p = 1.0;
        bool ok = true;
        for (int j = 0; j < steps && ok; ++j) {
            bool found = false;
            for (int b = 0; b < budget_per_step; ++b) {
                const double w = family == init_family::uniform ? uni(g) : nor(g);
                ++out.scanned[static_cast<std::size_t>(j)];
                if (path_accepts(w, p)) {
                    ++out.accepted[static_cast<std::size_t>(j)];
                    p *= w;
                    found = true;
                    break;
                }
            }
            ok = found;
        }
        if (!ok) continue;
        ++out.completed;
        out.min_product = std::min(out.min_product, p);
        out.max_product = std::max(out.max_product, p);
        if (!path_product_in_range(p)) out.products_in_range = false;
    }
    return out;
}

} // namespace ult
