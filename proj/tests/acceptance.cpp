// Acceptance run: one PASS/FAIL line per criterion. Expects to run from the
// repository root so the shipped configs resolve.

#include "ult/calibrate.hpp"
#include "ult/config.hpp"
#include "ult/harness.hpp"
#include "ult/init.hpp"
#include "ult/kernels.hpp"
#include "ult/net.hpp"
#include "ult/paths.hpp"
#include "ult/pwl.hpp"
#include "ult/subsum.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace ult;

namespace {

int passed = 0, total = 0;
std::FILE* summary = nullptr;

void report(const std::string& id, bool ok, const std::string& detail) {
    ++total;
    passed += ok;
    for (std::FILE* f : {stdout, summary}) {
        if (!f) continue;
        std::fprintf(f, "%s  %-4s %s\n", ok ? "PASS" : "FAIL", id.c_str(), detail.c_str());
        std::fflush(f);
    }
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

run_report run_config(const std::string& name) {
    const auto cfg = load_config("configs/" + name + ".yaml");
    auto r = run(cfg);
    write_run(r, "build/acceptance_out/" + name);
    return r;
}

double agg(const run_report& r, const char* key) { return r.doc["aggregate"][key]["median"].get<double>(); }
double wall(const run_report& r) { return r.timing["wall_clock_s"].get<double>(); }

void fourier() {
    const auto a = run_config("fourier_v1");
    const auto b = run_config("fourier_wide_v1");
    const double e = agg(a, "sup_error"), f = agg(a, "fraction"), fw = agg(b, "fraction");
    const bool ok = e <= 0.012 && f >= 0.030 && f <= 0.046 && wall(a) < 120 && fw >= 0.0028 && fw <= 0.0045;
    report("C1", ok,
           "fourier: median error " + fmt("%.4g", e) + " (<= 0.012), fraction " + fmt("%.4f", f) +
               " in [0.030, 0.046], " + fmt("%.1f", wall(a)) + " s; wide fraction " + fmt("%.5f", fw) +
               " in [0.0028, 0.0045]");
    const auto& u = a.doc["universality"];
    const int p = u["passed"].get<int>();
    report("C7a", p >= 48, "fourier universality: " + std::to_string(p) + "/50 residuals <= " +
                               fmt("%.3g", u["family_eps"].get<double>()) + ", worst " +
                               fmt("%.3g", u["residual"]["max"].get<double>()));
}

void poly() {
    const auto a = run_config("poly_v1");
    const double e = agg(a, "sup_error"), f = agg(a, "fraction");
    const bool ok = e <= 0.0015 && f >= 0.015 && f <= 0.030 && wall(a) < 600;
    report("C2", ok,
           "poly: median error " + fmt("%.4g", e) + " (<= 0.0015), fraction " + fmt("%.4f", f) +
               " in [0.015, 0.030], " + fmt("%.1f", wall(a)) + " s");
    const auto& u = a.doc["universality"];
    const int p = u["passed"].get<int>();
    report("C7b", p >= 48, "poly universality: " + std::to_string(p) + "/50 residuals <= " +
                               fmt("%.3g", u["family_eps"].get<double>()) + ", worst " +
                               fmt("%.3g", u["residual"]["max"].get<double>()));
}

void pwl_bounds() {
    const auto t0 = std::chrono::steady_clock::now();
    bool ok = true;
    double worst = 0.0; // measured / bound
    const double t = 2.0;
    const double lo = -t * std::numbers::ln2;
    const std::function<double(double)> ex = [t](double y) { return exp_clamped(y, t); };
    for (int N : {3, 5, 11, 21, 51, 101}) {
        const double dl = 1.0 / (N - 1);
        const auto lg = from_samples(log_target, 0.0, 1.0, N);
        const double el = sup_grid_error(log_target, lg, 0.0, 1.0, 100001);
        const auto er = from_samples(ex, lo, 0.0, N);
        const double ee = sup_grid_error(ex, er, lo, 0.0, 100001);
        const auto sr = from_samples(sin_target, 0.0, 1.0, N);
        const double es = sup_grid_error(sin_target, sr, 0.0, 1.0, 100001);
        const double bl = log_error_bound(dl), be = exp_error_bound(-lo / (N - 1)), bs = sin_error_bound(N, 1.0);
        ok = ok && el <= bl && ee <= be && es <= bs;
        worst = std::max({worst, el / bl, ee / be, es / bs});
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    report("C3", ok && secs < 60,
           "pwl bounds for N in {3,5,11,21,51,101}: worst measured/bound " + fmt("%.3f", worst) + ", " +
               fmt("%.2f", secs) + " s");
}

void scaling() {
    std::mt19937_64 g(2024);
    std::uniform_real_distribution<double> sig(0.25, 3.0), ux(-2.0, 2.0);
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
        architecture a;
        const int L = 2 + k % 4;
        a.widths.push_back(1 + k % 3);
        for (int l = 1; l < L; ++l) a.widths.push_back(5 + (k * 7 + l) % 20);
        a.widths.push_back(1);
        a.kinds.assign(static_cast<std::size_t>(L), layer_kind::dense);
        init_spec s;
        s.sigma_w.assign(static_cast<std::size_t>(L), 1.0);
        s.seed = static_cast<std::uint64_t>(k);
        s.bias = bias_convention::definition;
        const auto n = sample(a, s);
        std::vector<double> sg(static_cast<std::size_t>(L));
        double prod = 1.0;
        for (auto& v : sg) {
            v = sig(g);
            prod *= v;
        }
        const auto tn = scale_transform(n, sg);
        std::vector<double> x(static_cast<std::size_t>(a.widths[0]));
        for (int p = 0; p < 100; ++p) {
            for (auto& v : x) v = ux(g);
            const double y0 = forward(n, nullptr, x)[0], y1 = forward(tn, nullptr, x)[0];
            const double ref = prod * y0;
            const double rel = std::abs(y1 - ref) / std::max(std::abs(ref), 1e-300);
            if (ref != 0.0 || y1 != 0.0) worst = std::max(worst, rel);
        }
    }
    report("C4", worst <= 1e-10, "output scaling on 100 nets x 100 probes: worst relative deviation " + fmt("%.3g", worst));
}

void paths() {
    const auto r = run_config("paths_v1");
    bool ok = true;
    std::ostringstream os;
    for (const auto& f : r.doc["families"]) {
        const double fq = f["min_step_frequency"].get<double>();
        const bool in_range = f["products_in_range"].get<bool>();
        ok = ok && in_range && fq >= 1.0 / 16.0 - 0.01;
        os << f["family"].get<std::string>() << ": min step frequency " << fmt("%.4f", fq)
           << (in_range ? ", products in [1, 4/3]; " : ", product OUT of range; ");
    }
    os << "threshold 0.0525";
    report("C5", ok, os.str());
}

void subset_sum() {
    // best_k with an unbounded subset size must agree with the exact solver.
    bool same = true;
    int checked = 0;
    for (int n = 1; n <= 20; ++n)
        for (std::uint64_t t = 0; t < 10; ++t) {
            auto ground = trial_ground(distribution::uniform_product, n, 99, t);
            const double z = trial_target(1.0, 99, t);
            const subset_sum_instance inst{ground, z, 1e-3, 0};
            const auto a = solve(inst, solve_strategy::exact);
            const auto b = solve(inst, solve_strategy::best_k);
            same = same && a.achieved == b.achieved && a.indices == b.indices;
            ++checked;
        }
    const double rate5 = success_rate(distribution::uniform_product, 25, 1.0, 1e-3, 1000, solve_strategy::best_k, 0, 5);
    const double rate_exact = success_rate(distribution::uniform_product, 25, 1.0, 1e-3, 1000, solve_strategy::exact, 0);
    // Median minimal ground size for eps = 10^-1 ... 10^-4.
    std::vector<double> med;
    for (double eps : {1e-1, 1e-2, 1e-3, 1e-4}) {
        std::vector<double> ns;
        for (std::uint64_t t = 0; t < 200; ++t)
            ns.push_back(minimal_ground_size(distribution::uniform_product, 1.0, eps, 7, t, 48));
        med.push_back(median(ns));
    }
    bool mono = true;
    for (std::size_t i = 1; i < med.size(); ++i) mono = mono && med[i] > med[i - 1];
    std::ostringstream os;
    os << "exact == best_k on " << checked << " instances (n <= 20): " << (same ? "yes" : "no")
       << "; best-5 success at n=25, eps=1e-3: " << fmt("%.3f", rate5) << " (exact feasibility "
       << fmt("%.3f", rate_exact) << "); median n* for eps 1e-1..1e-4:";
    for (double m : med) os << ' ' << m;
    report("C6", same && rate5 >= 0.99 && mono, os.str());
}

void containment() {
    struct claim {
        const char* name;
        double alpha;
    };
    bool ok = true;
    std::ostringstream os;
    for (const auto& c : {claim{"normal", 0.4}, claim{"uniform_product", std::log(4.0) / 4.0},
                          claim{"normal_product", 0.2}}) {
        const auto r = contains_uniform_check(c.name, 1.0, c.alpha, 1000000, 5);
        ok = ok && r.pass;
        os << c.name << " alpha " << fmt("%.3f", c.alpha) << " floor " << fmt("%.3f", r.empirical_alpha_lower_bound)
           << "; ";
    }
    report("C8", ok, os.str());
}

void calibration_stability() {
    calibration_grid g;
    g.eps = {0.1, 0.03, 0.01};
    g.delta = {0.05, 0.1, 0.2};
    g.trials = 200;
    g.n_max = 48;
    std::vector<double> cs;
    for (std::uint64_t seed = 0; seed < 5; ++seed)
        cs.push_back(calibrate(distribution::uniform_product, formula_id::subset_sum, g, seed).C);
    const double med = median(cs);
    double dev = 0.0;
    for (double c : cs) dev = std::max(dev, std::abs(c - med) / med);
    std::ostringstream os;
    os << "uniform_product C over 5 master seeds:";
    for (double c : cs) os << ' ' << c;
    os << "; max deviation from median " << fmt("%.1f", 100 * dev) << "% (<= 25%)";
    report("P1", dev <= 0.25, os.str());

    // A looser delta grid must never need a larger constant.
    calibration_grid loose = g;
    loose.delta = {0.1, 0.2, 0.3};
    bool mono = true;
    std::ostringstream ms;
    ms << "calibrated C vs delta grid (seeds 0..2):";
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        const double tight = cs[static_cast<std::size_t>(seed)];
        const double l = calibrate(distribution::uniform_product, formula_id::subset_sum, loose, seed).C;
        mono = mono && l <= tight;
        ms << ' ' << tight << " -> " << l;
    }
    report("P2", mono, ms.str());
}

std::vector<double> coefficient_errors(const run_report& r) {
    std::vector<double> out;
    for (const auto& seed : r.doc["seeds"])
        for (const auto& c : seed["coefficients"]) out.push_back(c["error"].get<double>());
    return out;
}

void deep_vs_shallow() {
    // Same total neuron budget: 300 neurons in one layer or 75 in each of four.
    const auto s = run_config("linear_v1");
    const auto d = run_config("linear_deep_v1");
    const double es = median(coefficient_errors(s)), ed = median(coefficient_errors(d));
    const double ratio = std::max(es / ed, ed / es);
    report("P3", ratio <= 2.0,
           "linear ticket, 20 seeds: median per-parameter error shallow " + fmt("%.3g", es) + " vs split over 4 layers " +
               fmt("%.3g", ed) + " (ratio " + fmt("%.2f", ratio) + " <= 2); median sup error " +
               fmt("%.3g", agg(s, "sup_error")) + " vs " + fmt("%.3g", agg(d, "sup_error")));
}

void stage_delta() {
    const auto r = run_config("poly_smoke_v1");
    const double rate = r.doc["aggregate"]["success_rate"].get<double>();
    report("P4", rate >= 0.7,
           "theorem-mode poly pipeline (eps 0.1, delta 0.3), 50 seeds: success rate " + fmt("%.2f", rate) + " (>= 0.7)");
}

} // namespace

int main(int argc, char** argv) {
    // Optional arguments select groups by name, e.g. "ult_acceptance poly paths".
    const std::vector<std::pair<std::string, void (*)()>> groups{
        {"pwl", pwl_bounds},         {"scaling", scaling},     {"containment", containment},
        {"paths", paths},            {"subsetsum", subset_sum}, {"fourier", fourier},
        {"poly", poly},              {"calibration", calibration_stability},
        {"deep", deep_vs_shallow},   {"stages", stage_delta}};
    const std::vector<std::string> only(argv + 1, argv + argc);
    try {
        std::filesystem::create_directories("build/acceptance_out");
        summary = std::fopen("build/acceptance_out/summary.txt", "w");
        for (const auto& [name, fn] : groups)
            if (only.empty() || std::find(only.begin(), only.end(), name) != only.end()) fn();
    } catch (const std::exception& e) {
        std::printf("ERROR %s\n", e.what());
        return 2;
    }
    std::printf("%d/%d criteria met\n", passed, total);
    if (summary) {
        std::fprintf(summary, "%d/%d criteria met\n", passed, total);
        std::fclose(summary);
    }
    // Unmet criteria are reported above; the exit code only flags a broken run.
    return 0;
}
