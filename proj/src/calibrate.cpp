#include "ult/calibrate.hpp"

#include "ult/errors.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <fstream>

namespace ult {

distribution_constants constants_for(distribution d) {
    switch (d) {
    case distribution::uniform: return {1.0, 1.0, 1.0};
    case distribution::normal: return {1.0, 0.4, 2.0};
    case distribution::uniform_product: return {1.0, std::log(4.0) / 4.0, 2.0};
    case distribution::normal_product: return {1.0, 0.2, 2.0};
    }
    return {};
}

formula_id parse_formula(const std::string& s) {
    if (s == "subset_sum") return formula_id::subset_sum;
    if (s == "subset_sum_extended") return formula_id::subset_sum_extended;
    throw config_error("unknown formula '" + s + "'");
}

std::string to_string(formula_id f) {
    return f == formula_id::subset_sum ? "subset_sum" : "subset_sum_extended";
}

int required_n(distribution d, formula_id f, double m, double eps, double delta, double C) {
    const auto k = constants_for(d);
    if (f == formula_id::subset_sum) return required_ground_size(m, k.h, k.alpha, k.B, eps, delta, C);
    return required_ground_size_extended(k.h, m, k.alpha, k.B, eps, delta, C);
}

namespace {

constexpr double c_lo = 0.1;
constexpr double c_hi = 100.0;

struct evaluator {
    distribution d;
    formula_id f;
    const calibration_grid& grid;
    // Per eps: minimal ground size of every trial (common random numbers across C).
    std::vector<std::vector<int>> n_star;

    bool ok(double C, std::vector<calibration_point>* out = nullptr) const {
        bool all = true;
        for (std::size_t e = 0; e < grid.eps.size(); ++e) {
            for (double delta : grid.delta) {
                const int n = required_n(d, f, grid.m, grid.eps[e], delta, C);
                long hits = 0;
                for (int s : n_star[e]) hits += s <= n;
                const double rate = static_cast<double>(hits) / grid.trials;
                if (rate < 1.0 - delta) all = false;
                if (out) out->push_back({grid.eps[e], delta, n, rate});
            }
        }
        return all;
    }
};

double round3(double x) {
    const double p = std::pow(10.0, std::floor(std::log10(x)) - 2.0);
    return std::ceil(x / p - 1e-9) * p;
}

} // namespace

calibration_result calibrate(distribution d, formula_id f, const calibration_grid& grid, std::uint64_t seed) {
    if (grid.eps.size() < 3 || grid.delta.size() < 3) throw config_error("calibration grid must be at least 3x3");
    if (grid.trials < 1) throw config_error("calibration needs trials >= 1");
    evaluator ev{d, f, grid, {}};
    for (double eps : grid.eps) {
        std::vector<int> ns(static_cast<std::size_t>(grid.trials));
#pragma omp parallel for schedule(dynamic, 4)
        for (int t = 0; t < grid.trials; ++t)
            ns[static_cast<std::size_t>(t)] = minimal_ground_size(d, grid.m, eps, seed, static_cast<std::uint64_t>(t), grid.n_max);
        ev.n_star.push_back(std::move(ns));
    }

    calibration_result r;
    r.key = to_string(f) + "/" + to_string(d);
    double lo, hi;
    if (ev.ok(1.0)) {
        hi = 1.0;
        lo = 0.5;
        while (lo >= c_lo && ev.ok(lo)) {
            hi = lo;
            lo /= 2.0;
        }
        if (lo < c_lo) {
            if (ev.ok(c_lo)) {
                r.C = c_lo;
                r.converged = true;
                ev.ok(r.C, &r.points);
                return r;
            }
            lo = c_lo;
        }
    } else {
        lo = 1.0;
        hi = 2.0;
        while (hi <= c_hi && !ev.ok(hi)) {
            lo = hi;
            hi *= 2.0;
        }
        if (hi > c_hi) {
            if (!ev.ok(c_hi)) throw construction_error("calibration of " + r.key + " did not converge in [0.1, 100]");
            hi = c_hi;
        }
    }
    // Invariant: ok(hi), !ok(lo).
    while ((hi - lo) / hi > 5e-4) {
        const double mid = 0.5 * (lo + hi);
        if (ev.ok(mid))
            hi = mid;
        else
            lo = mid;
    }
    r.C = std::min(c_hi, round3(hi));
    r.converged = true;
    ev.ok(r.C, &r.points);
    return r;
}

std::map<std::string, double> load_calibration(const std::string& path) {
    std::map<std::string, double> out;
    YAML::Node root;
    try {
        root = YAML::LoadFile(path);
    } catch (const YAML::Exception& e) {
        throw config_error(path + ": " + e.what());
    }
    const auto node = root["calibration"];
    if (!node || !node.IsMap()) throw config_error(path + ": missing 'calibration' map");
    for (const auto& kv : node) out[kv.first.as<std::string>()] = kv.second.as<double>();
    return out;
}

void store_calibration(const std::string& path, const std::map<std::string, double>& values) {
    YAML::Emitter em;
    em.SetDoublePrecision(6);
    em << YAML::BeginMap << YAML::Key << "calibration" << YAML::Value << YAML::BeginMap;
    for (const auto& [k, v] : values) em << YAML::Key << k << YAML::Value << v;
    em << YAML::EndMap << YAML::EndMap;
    std::ofstream out(path);
    if (!out) throw config_error("cannot write " + path);
    out << em.c_str() << '\n';
}

} // namespace ult
