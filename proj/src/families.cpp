#include "ult/families.hpp"

#include "ult/errors.hpp"
#include "ult/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace ult {

double poly_family_spec::t() const {
    double t = 1.0;
    for (const auto& r : exponents) {
        double s = 0.0;
        for (double v : r) s += v;
        t = std::max(t, s);
    }
    return t;
}

double poly_family_spec::q() const {
    double q = 0.0;
    for (const auto& r : exponents)
        for (double v : r) q = std::max(q, v);
    return q;
}

void poly_family_spec::validate() const {
    if (d < 1) throw config_error("poly family needs d >= 1");
    if (exponents.empty()) throw config_error("poly family needs at least one exponent vector");
    for (const auto& r : exponents) {
        if (static_cast<int>(r.size()) != d) throw config_error("exponent vector length must equal d");
        for (double v : r) {
            if (!(v >= 0.0) || !std::isfinite(v)) throw config_error("exponents must be finite and nonnegative");
            if (integer_exponents && v != std::floor(v)) throw config_error("theorem mode needs integer exponents");
        }
    }
    if (!(eps > 0 && eps < 1 && delta > 0 && delta < 1)) throw config_error("eps and delta must lie in (0,1)");
    if (m < 1) throw config_error("m must be >= 1");
    if (N_log < 0 || N_exp < 0 || N_log == 1 || N_exp == 1) throw config_error("knot counts must be 0 or >= 2");
}

int fourier_family_spec::M() const {
    int M = 0;
    for (const auto& n : freqs)
        for (int v : n) M = std::max(M, v);
    return M;
}

void fourier_family_spec::validate() const {
    if (d < 1) throw config_error("fourier family needs d >= 1");
    if (freqs.empty()) throw config_error("fourier family needs at least one frequency vector");
    if (phases.size() != freqs.size()) throw config_error("one phase per frequency vector");
    for (const auto& n : freqs) {
        if (static_cast<int>(n.size()) != d) throw config_error("frequency vector length must equal d");
        for (int v : n)
            if (v < 0) throw config_error("frequencies must be nonnegative");
    }
    for (double c : phases)
        if (!(c >= 0.0 && c <= 1.0)) throw config_error("phases must lie in [0,1]");
    if (!(eps > 0 && eps < 1 && delta > 0 && delta < 1)) throw config_error("eps and delta must lie in (0,1)");
    if (m < 1) throw config_error("m must be >= 1");
    if (N_sin < 0 || N_sin == 1) throw config_error("N_sin must be 0 or >= 2");
}

void family_target::eval_network(const double* x, double* y) const {
    if (!has_linear) {
        y[0] = eval(outer, x[0]);
        return;
    }
    double u[64];
    std::vector<double> big;
    const double* in = x;
    if (has_inner) {
        double* buf = u;
        if (d > 64) {
            big.resize(static_cast<std::size_t>(d));
            buf = big.data();
        }
        for (int i = 0; i < d; ++i) buf[i] = eval(inner, x[i]);
        in = buf;
    }
    for (int j = 0; j < k; ++j) {
        double acc = linear.b[static_cast<std::size_t>(j)];
        for (int i = 0; i < d; ++i) acc += linear.W[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] * in[i];
        y[j] = eval(outer, std::max(acc, 0.0));
    }
}

void family_target::eval_basis(const double* x, double* y) const {
    for (int j = 0; j < k; ++j) {
        if (family == "poly") {
            double v = 1.0;
            for (int i = 0; i < d; ++i)
                v *= std::pow(0.5 * (1.0 + x[i]), linear.W[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)]);
            y[j] = v;
        } else {
            double a = has_linear ? linear.b[static_cast<std::size_t>(j)] : 0.0;
            if (has_linear)
                for (int i = 0; i < d; ++i) a += linear.W[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] * x[i];
            else
                a = x[0];
            y[j] = std::sin(2.0 * std::numbers::pi * a) + outer_shift;
        }
    }
}

family_target build_poly_target(const poly_family_spec& spec) {
    spec.validate();
    family_target t;
    t.family = "poly";
    t.d = spec.d;
    t.k = spec.k();
    t.eps = spec.eps;
    t.delta = spec.delta;
    t.m = spec.m;
    const double tt = spec.t();
    const double km = static_cast<double>(t.k) * spec.m;
    const double ds = 1.0 - std::cbrt(1.0 - spec.delta);
    const int N_log = spec.N_log ? spec.N_log : choose_N(pwl_family::log, spec.eps, tt, t.k, spec.m);
    const int N_exp = spec.N_exp ? spec.N_exp : choose_N(pwl_family::exp, spec.eps, tt, t.k, spec.m);

    t.has_inner = true;
    t.inner = from_samples([](double x) { return -log_target(x); }, 0.0, 1.0, N_log);
    t.inner_lo = 0.0;
    t.inner_hi = 1.0;

    t.has_linear = true;
    t.linear.W = spec.exponents;
    t.linear.b.assign(static_cast<std::size_t>(t.k), 0.0);
    t.linear.lo.assign(static_cast<std::size_t>(t.d), 0.0);
    t.linear.hi.assign(static_cast<std::size_t>(t.d), std::log(2.0));

    t.outer_lo = 0.0;
    t.outer_hi = tt * std::log(2.0);
    t.outer = from_samples([tt](double y) { return exp_clamped(-y, tt); }, t.outer_lo, t.outer_hi, N_exp);

    t.sheet.push_back({"log", spec.eps / (6.0 * tt * km), ds, N_log, 2.0, 1.0});
    t.sheet.push_back({"multi", spec.eps / (6.0 * km), ds, t.k * t.d, spec.q(), static_cast<double>(t.d)});
    t.sheet.push_back({"exp", spec.eps / (6.0 * km), ds, N_exp, 2.0, tt * std::log(2.0)});
    return t;
}

family_target build_fourier_target(const fourier_family_spec& spec) {
    spec.validate();
    family_target t;
    t.family = "fourier";
    t.d = spec.d;
    t.k = spec.k();
    t.eps = spec.eps;
    t.delta = spec.delta;
    t.m = spec.m;
    const double km = static_cast<double>(t.k) * spec.m;
    const double ds = 1.0 - std::sqrt(1.0 - spec.delta);
    const int M = spec.M();
    const double eps_sin = spec.eps / (4.0 * km);
    const int N_unit = spec.N_sin ? spec.N_sin : choose_N(pwl_family::sin, eps_sin);

    const bool identity = spec.d == 1 && t.k == 1 && spec.freqs[0][0] == 1 && spec.phases[0] == 0.0;
    t.has_linear = !identity;
    double len = 1.0;
    if (t.has_linear) {
        t.linear.W.resize(static_cast<std::size_t>(t.k));
        for (int j = 0; j < t.k; ++j)
            t.linear.W[static_cast<std::size_t>(j)].assign(spec.freqs[static_cast<std::size_t>(j)].begin(),
                                                           spec.freqs[static_cast<std::size_t>(j)].end());
        t.linear.b = spec.phases;
        t.linear.lo.assign(static_cast<std::size_t>(t.d), 0.0);
        t.linear.hi.assign(static_cast<std::size_t>(t.d), 1.0);
        len = std::ceil(static_cast<double>(spec.d) * M + 1.0);
    }
    // Keep the knot spacing of the unit interval over the whole domain.
    const int N = 1 + (N_unit - 1) * static_cast<int>(len);
    t.outer_lo = 0.0;
    t.outer_hi = len;
    t.outer_shift = 1.0;
    t.outer = from_samples([](double y) { return sin_target(y) + 1.0; }, 0.0, len, N);

    t.sheet.push_back({"multi", spec.eps / (8.0 * km * std::numbers::pi), ds, t.k * t.d, 1.0 + M,
                       static_cast<double>(t.d)});
    t.sheet.push_back({"sin", eps_sin, ds, N, 1.0 + (spec.d + 1.0) * M, (spec.d + 1.0) * M});
    return t;
}

namespace {

struct stage_layout {
    int inner_end = 0;  // last layer of the leading shared run (poly)
    int linear_end = 0; // last dense layer
};

stage_layout read_layout(const family_target& t, const mother_net& net) {
    const auto& kinds = net.arch().kinds;
    const int L = net.depth();
    int l = 0;
    stage_layout s;
    if (t.has_inner) {
        while (l < L && kinds[static_cast<std::size_t>(l)] == layer_kind::shared) ++l;
        s.inner_end = l;
        if (s.inner_end < 2) throw shape_error("poly mother needs >= 2 leading shared layers");
    }
    while (l < L && kinds[static_cast<std::size_t>(l)] == layer_kind::dense) ++l;
    s.linear_end = l;
    if (t.has_linear && s.linear_end - s.inner_end < 2)
        throw shape_error("mother needs >= 2 dense layers for the linear stage");
    if (!t.has_linear && s.linear_end != s.inner_end)
        throw shape_error("mother has dense layers but the target has no linear stage");
    for (int r = l; r < L; ++r)
        if (kinds[static_cast<std::size_t>(r)] != layer_kind::shared)
            throw shape_error("trailing univariate stage must be shared layers");
    if (L - s.linear_end < 2) throw shape_error("mother needs >= 2 trailing shared layers");
    if (net.input_dim() != t.d) throw shape_error("mother input width must equal d");
    if (t.has_linear && net.arch().widths[static_cast<std::size_t>(s.linear_end)] != t.k)
        throw shape_error("last dense layer width must equal k");
    if (net.arch().widths.back() != 1) throw shape_error("mother output channels must be 1");
    return s;
}

} // namespace

family_report prune_family(const family_target& t, const mother_net& mother, long grid_per_dim,
                           const prune_options& opt) {
    const auto lay = read_layout(t, mother);
    const int L = mother.depth();
    detail::construction c(mother, opt);

    bool ok = true;
    auto stage_eps = [&](const std::string& name) {
        for (const auto& s : t.sheet)
            if (s.name == name) return s.eps;
        throw construction_error("missing stage sheet entry " + name);
    };

    if (t.has_inner)
        ok = c.build_univariate("log", 0, lay.inner_end, 0, 0, t.inner, t.inner_lo, t.inner_hi, stage_eps("log"));

    if (ok && t.has_linear) {
        detail::segment_spec sp;
        sp.label = "multi";
        sp.in = lay.inner_end;
        sp.out = lay.linear_end;
        for (int j = 0; j < t.k; ++j) sp.outputs.push_back(j);
        // Columns of the first dense layer: position-major flattening of the previous state.
        const int channels = t.has_inner ? mother.arch().widths[static_cast<std::size_t>(lay.inner_end)] : 1;
        for (int i = 0; i < t.d; ++i)
            sp.features.push_back({i * channels, 1, t.linear.lo[static_cast<std::size_t>(i)],
                                   t.linear.hi[static_cast<std::size_t>(i)]});
        const double budget = stage_eps("multi") / t.linear.Q();
        for (int j = 0; j < t.k; ++j) {
            sp.coef.push_back(t.linear.W[static_cast<std::size_t>(j)]);
            sp.bias.push_back(t.linear.b[static_cast<std::size_t>(j)]);
            sp.budget.push_back(budget);
        }
        ok = c.build_segment(sp);
    }

    const std::string outer_name = t.family == "poly" ? "exp" : "sin";
    if (ok) c.build_univariate(outer_name, lay.linear_end, L, 0, 0, t.outer, t.outer_lo, t.outer_hi, stage_eps(outer_name));

    family_report fr;
    fr.ticket = std::move(c.report());
    auto& rep = fr.ticket;
    const double km = static_cast<double>(t.k) * t.m;
    fr.pruning_budget = t.eps / (2.0 * km);
    rep.eps = fr.pruning_budget;
    rep.delta = t.delta;
    rep.fraction = surviving_fraction(mother, rep.mask);

    const probe_grid grid = probe_grid::unit(t.d, grid_per_dim);
    rep.grid_points = grid.size();
    const sparse_net sn(mother, rep.mask);
    rep.sup_error = parallel::sup_error(sn, rep.lambda, grid, [&t](const double* x, double* y) { t.eval_network(x, y); }).err;
    fr.basis_error = parallel::sup_error(sn, rep.lambda, grid, [&t](const double* x, double* y) { t.eval_basis(x, y); }).err;

    std::vector<double> x(static_cast<std::size_t>(t.d)), a(static_cast<std::size_t>(t.k)), b(static_cast<std::size_t>(t.k));
    for (long i = 0; i < grid.size(); ++i) {
        grid.point(i, x.data());
        t.eval_network(x.data(), a.data());
        t.eval_basis(x.data(), b.data());
        for (int j = 0; j < t.k; ++j)
            fr.approximation_error = std::max(fr.approximation_error, std::abs(a[static_cast<std::size_t>(j)] - b[static_cast<std::size_t>(j)]));
    }
    rep.success = rep.failures.empty() && rep.sup_error <= fr.pruning_budget && fr.basis_error <= t.eps / km;
    return fr;
}

} // namespace ult
