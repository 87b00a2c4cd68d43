#include "ult/init.hpp"

#include "ult/errors.hpp"
#include "ult/rng.hpp"

#include <cmath>

namespace ult {

std::string to_string(init_family f) { return f == init_family::uniform ? "uniform" : "normal"; }
std::string to_string(bias_convention b) { return b == bias_convention::definition ? "definition" : "per_layer"; }

init_family parse_init_family(const std::string& s) {
    if (s == "uniform") return init_family::uniform;
    if (s == "normal") return init_family::normal;
    throw config_error("unknown init family '" + s + "'");
}

bias_convention parse_bias_convention(const std::string& s) {
    if (s == "definition") return bias_convention::definition;
    if (s == "per_layer") return bias_convention::per_layer;
    throw config_error("unknown bias convention '" + s + "'");
}

void init_spec::validate() const {
    if (sigma_w.empty()) throw domain_error("init spec needs sigma_w");
    for (double s : sigma_w)
        if (!(s > 0.0) || !std::isfinite(s)) throw domain_error("sigma_w must be positive");
}

double bias_scale(const init_spec& spec, int l) {
    double p = 1.0;
    for (int k = 0; k < l; ++k) {
        const double s = spec.sigma_w.at(static_cast<std::size_t>(k));
        p *= spec.bias == bias_convention::definition ? s : s / 2.0;
    }
    return spec.bias == bias_convention::definition ? p / 2.0 : p;
}

namespace {

constexpr std::uint64_t weight_tag = 1;
constexpr std::uint64_t bias_tag = 2;

void fill(std::vector<double>& v, init_family fam, double scale, rng_t& g) {
    if (fam == init_family::uniform) {
        std::uniform_real_distribution<double> d(-scale, scale);
        for (auto& x : v) x = d(g);
    } else {
        std::normal_distribution<double> d(0.0, scale);
        for (auto& x : v) x = d(g);
    }
}

} // namespace

mother_net sample(const architecture& arch, const init_spec& spec) {
    spec.validate();
    if (static_cast<int>(spec.sigma_w.size()) != arch.depth())
        throw shape_error("sigma_w needs one entry per layer");
    mother_net net(arch, spec.sigma_w);
    for (int l = 1; l <= arch.depth(); ++l) {
        auto& ly = net.at(l);
        auto gw = make_stream(spec.seed, {static_cast<std::uint64_t>(l), weight_tag});
        auto gb = make_stream(spec.seed, {static_cast<std::uint64_t>(l), bias_tag});
        fill(ly.w, spec.family, spec.sigma_w[static_cast<std::size_t>(l - 1)], gw);
        fill(ly.b, spec.family, bias_scale(spec, l), gb);
    }
    return net;
}

double lambda_factor(const init_spec& spec, int L) {
    if (L < 1) throw domain_error("lambda_factor needs L >= 1");
    double lam = 1.0;
    for (int l = 0; l < L; ++l) lam *= 2.0 / spec.sigma_w.at(static_cast<std::size_t>(l));
    return lam;
}

} // namespace ult
