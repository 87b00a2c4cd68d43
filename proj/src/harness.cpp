#include "ult/harness.hpp"

#include "ult/calibrate.hpp"
#include "ult/errors.hpp"
#include "ult/fit.hpp"
#include "ult/kernels.hpp"
#include "ult/paths.hpp"
#include "ult/rng.hpp"

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace ult {

std::string library_version() { return "0.1.0"; }

std::uint64_t run_seed(std::uint64_t master, int index) {
    return derive_seed(master, {fnv1a("run"), static_cast<std::uint64_t>(index)});
}

namespace {

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string hex64(std::uint64_t v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string file_hash(const std::string& path) {
    if (path.empty()) return "";
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return hex64(fnv1a(ss.str()));
}

double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

json stats(const std::vector<double>& v) {
    if (v.empty()) return json::object();
    return {{"median", median(v)},
            {"min", *std::min_element(v.begin(), v.end())},
            {"max", *std::max_element(v.begin(), v.end())}};
}

struct seed_outcome {
    json report;
    double error = 0.0;
    double basis_error = 0.0;
    double fraction = 0.0;
    bool success = false;
    std::vector<coefficient_record> coefficients;
    mother_net net;
    prune_mask mask;
};

// Fraction of random bounded combinations of the basis that the ticket reaches within
// the family eps after refitting only the last layer.
json universality(const experiment_config& cfg, const family_target& t, const mother_net& net, const prune_mask& mask,
                  double family_eps) {
    const sparse_net sn(net, mask);
    const double lambda = net.lambda();
    auto sample = [&](long per_dim, std::vector<std::vector<double>>& F, std::vector<std::vector<double>>& B) {
        const auto grid = probe_grid::unit(t.d, per_dim);
        std::vector<double> x(static_cast<std::size_t>(t.d)), b(static_cast<std::size_t>(t.k));
        for (long i = 0; i < grid.size(); ++i) {
            grid.point(i, x.data());
            auto y = sn.eval(x);
            for (auto& v : y) v *= lambda;
            F.push_back(std::move(y));
            t.eval_basis(x.data(), b.data());
            for (auto& v : b) v -= t.outer_shift;
            B.push_back(b);
        }
    };
    std::vector<std::vector<double>> F_fit, B_fit, F_eval, B_eval;
    sample(cfg.universality.fit_grid, F_fit, B_fit);
    sample(cfg.universality.eval_grid, F_eval, B_eval);
    auto g = make_stream(cfg.master_seed, {fnv1a("universality")});
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    int passed = 0;
    std::vector<double> residuals;
    bool warned = false;
    for (int c = 0; c < cfg.universality.combos; ++c) {
        std::vector<double> a(static_cast<std::size_t>(t.k));
        for (auto& v : a) v = U(g);
        const double d0 = U(g);
        auto combine = [&](const std::vector<std::vector<double>>& B) {
            std::vector<std::vector<double>> Y;
            Y.reserve(B.size());
            for (const auto& b : B) {
                double s = d0;
                for (int j = 0; j < t.k; ++j) s += a[static_cast<std::size_t>(j)] * b[static_cast<std::size_t>(j)];
                Y.push_back({s});
            }
            return Y;
        };
        const auto fit = fit_last_layer(F_fit, combine(B_fit));
        warned = warned || fit.rank_deficient;
        const double res = fit_residual(fit, F_eval, combine(B_eval));
        residuals.push_back(res);
        passed += res <= family_eps;
    }
    return {{"combos", cfg.universality.combos},
            {"family_eps", family_eps},
            {"passed", passed},
            {"rate", cfg.universality.combos ? static_cast<double>(passed) / cfg.universality.combos : 0.0},
            {"residual", stats(residuals)},
            {"condition_warning", warned}};
}

void check(run_report& r, bool ok, const std::string& what) {
    if (!ok) {
        r.threshold_failures.push_back(what);
        r.accepted = false;
    }
}

void run_family(const experiment_config& cfg, run_report& out) {
    const bool poly = cfg.name == "poly";
    const family_target target = poly ? build_poly_target(cfg.poly) : build_fourier_target(cfg.fourier);
    json sheet = json::array();
    for (const auto& s : target.sheet) sheet.push_back(to_json(s));
    out.doc["stages"] = sheet;

    std::vector<seed_outcome> res(static_cast<std::size_t>(cfg.seeds));
#pragma omp parallel for schedule(dynamic, 1)
    for (int i = 0; i < cfg.seeds; ++i) {
        auto spec = cfg.init;
        spec.seed = run_seed(cfg.master_seed, i);
        auto net = sample(cfg.mother, spec);
        auto fr = prune_family(target, net, cfg.grid, cfg.prune);
        auto& o = res[static_cast<std::size_t>(i)];
        o.report = to_json(fr);
        o.report["index"] = i;
        o.report["seed"] = spec.seed;
        o.error = fr.ticket.sup_error;
        o.basis_error = fr.basis_error;
        o.fraction = fr.ticket.fraction;
        o.success = fr.ticket.success;
        o.coefficients = fr.ticket.coefficients;
        if (i == 0) {
            o.net = std::move(net);
            o.mask = fr.ticket.mask;
        }
    }

    json seeds = json::array();
    std::vector<double> err, berr, frac;
    int ok = 0;
    csv_table seed_tab{"seeds", {"index", "seed", "sup_error", "basis_error", "fraction", "success"}, {}};
    csv_table coef_tab{"coefficients", {"index", "name", "target", "achieved", "error", "budget", "ground", "chosen", "within_budget"}, {}};
    for (int i = 0; i < cfg.seeds; ++i) {
        const auto& o = res[static_cast<std::size_t>(i)];
        seeds.push_back(o.report);
        err.push_back(o.error);
        berr.push_back(o.basis_error);
        frac.push_back(o.fraction);
        ok += o.success;
        seed_tab.rows.push_back({std::to_string(i), std::to_string(o.report["seed"].get<std::uint64_t>()), num(o.error),
                                 num(o.basis_error), num(o.fraction), o.success ? "1" : "0"});
        for (const auto& c : o.coefficients)
            coef_tab.rows.push_back({std::to_string(i), c.name, num(c.target), num(c.achieved), num(c.error), num(c.budget),
                                     std::to_string(c.ground), std::to_string(c.chosen), c.within_budget ? "1" : "0"});
    }
    out.doc["seeds"] = seeds;
    const double rate = cfg.seeds ? static_cast<double>(ok) / cfg.seeds : 0.0;
    out.doc["aggregate"] = {{"success_rate", rate},
                            {"sup_error", stats(err)},
                            {"basis_error", stats(berr)},
                            {"fraction", stats(frac)}};
    out.tables.push_back(std::move(seed_tab));
    out.tables.push_back(std::move(coef_tab));

    const auto& a = cfg.accept;
    if (a.median_error) check(out, median(err) <= *a.median_error, "median sup error above threshold");
    if (a.fraction_lo) check(out, median(frac) >= *a.fraction_lo && median(frac) <= *a.fraction_hi, "median fraction outside range");
    if (a.min_success_rate) check(out, rate >= *a.min_success_rate, "success rate below threshold");

    if (cfg.universality.combos > 0) {
        const double family_eps = poly ? cfg.poly.eps : cfg.fourier.eps;
        auto u = universality(cfg, target, res[0].net, res[0].mask, family_eps);
        if (a.min_universality) check(out, u["rate"].get<double>() >= *a.min_universality, "universality rate below threshold");
        out.doc["universality"] = std::move(u);
    }
}

void run_linear(const experiment_config& cfg, run_report& out) {
    const auto& t = cfg.linear.target;
    std::vector<json> reports(static_cast<std::size_t>(cfg.seeds));
    std::vector<double> err(static_cast<std::size_t>(cfg.seeds)), frac(static_cast<std::size_t>(cfg.seeds));
    std::vector<char> succ(static_cast<std::size_t>(cfg.seeds));
#pragma omp parallel for schedule(dynamic, 1)
    for (int i = 0; i < cfg.seeds; ++i) {
        auto spec = cfg.init;
        spec.seed = run_seed(cfg.master_seed, i);
        const auto net = sample(cfg.mother, spec);
        const auto rep = prune_linear(net, t, cfg.eps, cfg.delta, cfg.prune);
        auto j = to_json(rep);
        j["index"] = i;
        j["seed"] = spec.seed;
        reports[static_cast<std::size_t>(i)] = std::move(j);
        err[static_cast<std::size_t>(i)] = rep.sup_error;
        frac[static_cast<std::size_t>(i)] = rep.fraction;
        succ[static_cast<std::size_t>(i)] = rep.success;
    }
    json seeds = json::array();
    csv_table seed_tab{"seeds", {"index", "sup_error", "fraction", "success"}, {}};
    int ok = 0;
    for (int i = 0; i < cfg.seeds; ++i) {
        seeds.push_back(reports[static_cast<std::size_t>(i)]);
        ok += succ[static_cast<std::size_t>(i)];
        seed_tab.rows.push_back({std::to_string(i), num(err[static_cast<std::size_t>(i)]), num(frac[static_cast<std::size_t>(i)]),
                                 succ[static_cast<std::size_t>(i)] ? "1" : "0"});
    }
    out.doc["seeds"] = seeds;
    const double rate = cfg.seeds ? static_cast<double>(ok) / cfg.seeds : 0.0;
    out.doc["aggregate"] = {{"success_rate", rate}, {"sup_error", stats(err)}, {"fraction", stats(frac)}};
    if (!cfg.calibration_file.empty()) {
        const auto cal = load_calibration(cfg.calibration_file);
        const auto it = cal.find("subset_sum/uniform_product");
        if (it != cal.end()) {
            const int L0 = cfg.mother.depth();
            out.doc["required_width"] = required_width(width_kind::linear, std::max(1.0, std::ceil(t.max_abs())), t.nonzeros(),
                                                       t.Q(), t.d(), t.m(), L0, cfg.eps, cfg.delta, it->second);
        }
    }
    out.tables.push_back(std::move(seed_tab));
    const auto& a = cfg.accept;
    if (a.median_error) check(out, median(err) <= *a.median_error, "median sup error above threshold");
    if (a.min_success_rate) check(out, rate >= *a.min_success_rate, "success rate below threshold");
}

void run_subsetsum(const experiment_config& cfg, run_report& out) {
    const auto& s = cfg.subsetsum;
    csv_table tab{"success", {"distribution", "n", "eps", "delta", "success_rate", "meets"}, {}};
    json rows = json::array();
    bool all = true;
    for (auto d : s.distributions)
        for (int n : s.n)
            for (double eps : s.eps) {
                const double rate = success_rate(d, n, s.m, eps, s.trials, s.strategy, cfg.master_seed, s.max_subset);
                if (s.delta.empty()) {
                    tab.rows.push_back({to_string(d), std::to_string(n), num(eps), "", num(rate), ""});
                    rows.push_back({{"distribution", to_string(d)}, {"n", n}, {"eps", eps}, {"success_rate", rate}});
                }
                for (double delta : s.delta) {
                    const bool meets = rate >= 1.0 - delta;
                    tab.rows.push_back({to_string(d), std::to_string(n), num(eps), num(delta), num(rate), meets ? "1" : "0"});
                    rows.push_back({{"distribution", to_string(d)}, {"n", n}, {"eps", eps}, {"delta", delta},
                                    {"success_rate", rate}, {"meets", meets}});
                    all = all && meets;
                }
            }
    out.doc["rows"] = rows;
    out.doc["aggregate"] = {{"all_rows_meet", all}};
    out.tables.push_back(std::move(tab));
    if (cfg.accept.min_success_rate) {
        double worst = 1.0;
        for (const auto& r : rows) worst = std::min(worst, r["success_rate"].get<double>());
        check(out, worst >= *cfg.accept.min_success_rate, "subset-sum success rate below threshold");
    }
}

void run_paths(const experiment_config& cfg, run_report& out) {
    const auto& p = cfg.paths;
    csv_table tab{"paths", {"family", "step", "scanned", "accepted", "frequency"}, {}};
    json fams = json::array();
    for (auto f : p.families) {
        const auto r = simulate_paths(f, p.steps, p.trials, p.budget, cfg.master_seed);
        json steps = json::array();
        double worst = 1.0;
        for (int s = 0; s < p.steps; ++s) {
            const double fq = r.step_frequency(s);
            worst = std::min(worst, fq);
            steps.push_back({{"scanned", r.scanned[static_cast<std::size_t>(s)]},
                             {"accepted", r.accepted[static_cast<std::size_t>(s)]},
                             {"frequency", fq}});
            tab.rows.push_back({to_string(f), std::to_string(s), std::to_string(r.scanned[static_cast<std::size_t>(s)]),
                                std::to_string(r.accepted[static_cast<std::size_t>(s)]), num(fq)});
        }
        fams.push_back({{"family", to_string(f)},
                        {"paths", r.paths},
                        {"completed", r.completed},
                        {"min_product", r.min_product},
                        {"max_product", r.max_product},
                        {"products_in_range", r.products_in_range},
                        {"min_step_frequency", worst},
                        {"steps", steps}});
        check(out, r.products_in_range, "path product outside [1, 4/3] for " + to_string(f));
        if (cfg.accept.min_success_rate)
            check(out, worst >= *cfg.accept.min_success_rate, "path step frequency below threshold for " + to_string(f));
    }
    out.doc["families"] = fams;
    out.tables.push_back(std::move(tab));
}

} // namespace

json to_json(const experiment_config& c) {
    json j;
    j["experiment"] = c.name;
    j["version"] = c.version;
    j["seeds"] = {{"count", c.seeds}, {"master", c.master_seed}};
    j["grid"] = c.grid;
    j["init"] = {{"family", to_string(c.init.family)}, {"sigma_w", c.init.sigma_w}, {"bias", to_string(c.init.bias)}};
    if (c.has_mother) {
        json kinds = json::array();
        for (auto k : c.mother.kinds) kinds.push_back(to_string(k));
        j["mother"] = {{"widths", c.mother.widths}, {"kinds", kinds}, {"output_activation", to_string(c.mother.output_activation)}};
    }
    if (c.name == "poly")
        j["family"] = {{"d", c.poly.d}, {"exponents", c.poly.exponents}, {"integer_exponents", c.poly.integer_exponents},
                       {"N_log", c.poly.N_log}, {"N_exp", c.poly.N_exp}, {"eps", c.poly.eps}, {"delta", c.poly.delta}, {"m", c.poly.m}};
    if (c.name == "fourier")
        j["family"] = {{"d", c.fourier.d}, {"freqs", c.fourier.freqs}, {"phases", c.fourier.phases}, {"N_sin", c.fourier.N_sin},
                       {"eps", c.fourier.eps}, {"delta", c.fourier.delta}, {"m", c.fourier.m}};
    if (c.name == "linear") j["target"] = to_json(c.linear.target);
    if (c.name == "subsetsum") {
        json ds = json::array();
        for (auto d : c.subsetsum.distributions) ds.push_back(to_string(d));
        j["subsetsum"] = {{"distributions", ds}, {"n", c.subsetsum.n}, {"eps", c.subsetsum.eps}, {"delta", c.subsetsum.delta},
                          {"m", c.subsetsum.m}, {"trials", c.subsetsum.trials}, {"strategy", to_string(c.subsetsum.strategy)},
                          {"max_subset", c.subsetsum.max_subset}};
    }
    if (c.name == "paths") {
        json fs = json::array();
        for (auto f : c.paths.families) fs.push_back(to_string(f));
        j["paths"] = {{"families", fs}, {"steps", c.paths.steps}, {"trials", c.paths.trials}, {"budget", c.paths.budget}};
    }
    j["prune"] = {{"eps", c.eps}, {"delta", c.delta}, {"ground_size", c.prune.ground_size},
                  {"min_ground_size", c.prune.min_ground_size}, {"max_subset", c.prune.max_subset},
                  {"path_budget", c.prune.path_budget}, {"shared_pools", c.prune.shared_pools}};
    j["universality"] = {{"combos", c.universality.combos}, {"fit_grid", c.universality.fit_grid},
                         {"eval_grid", c.universality.eval_grid}};
    json acc = json::object();
    if (c.accept.median_error) acc["median_error"] = *c.accept.median_error;
    if (c.accept.fraction_lo) acc["fraction"] = {*c.accept.fraction_lo, *c.accept.fraction_hi};
    if (c.accept.runtime_s) acc["runtime_s"] = *c.accept.runtime_s;
    if (c.accept.min_success_rate) acc["min_success_rate"] = *c.accept.min_success_rate;
    if (c.accept.min_universality) acc["min_universality"] = *c.accept.min_universality;
    j["accept"] = acc;
    return j;
}

run_report run(const experiment_config& cfg, int jobs) {
    if (jobs > 0) omp_set_num_threads(jobs);
    const auto t0 = std::chrono::steady_clock::now();
    run_report r;
    r.doc["schema"] = run_schema;
    r.doc["library_version"] = library_version();
    r.doc["calibration_hash"] = file_hash(cfg.calibration_file);
    r.doc["config"] = to_json(cfg);

    const bool seeded = cfg.name == "poly" || cfg.name == "fourier" || cfg.name == "linear";
    if (seeded && cfg.seeds == 0) {
        r.doc["dry_run"] = true;
    } else {
        r.doc["dry_run"] = false;
        if (cfg.name == "poly" || cfg.name == "fourier")
            run_family(cfg, r);
        else if (cfg.name == "linear")
            run_linear(cfg, r);
        else if (cfg.name == "subsetsum")
            run_subsetsum(cfg, r);
        else
            run_paths(cfg, r);
    }
    // The runtime check lives in timing.json so report.json stays reproducible.
    r.doc["threshold_failures"] = r.threshold_failures;
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    r.timing = {{"wall_clock_s", secs}, {"threads", omp_get_max_threads()}};
    if (cfg.accept.runtime_s && !r.doc["dry_run"].get<bool>()) {
        const bool ok = secs <= *cfg.accept.runtime_s;
        r.timing["runtime_ok"] = ok;
        check(r, ok, "runtime above threshold");
    }
    r.timing["accepted"] = r.accepted;
    return r;
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch;
    }
    return out + "\"";
}

void write_run(const run_report& r, const std::string& dir) {
    std::filesystem::create_directories(dir);
    write_json_file(dir + "/report.json", r.doc);
    write_json_file(dir + "/timing.json", r.timing);
    for (const auto& t : r.tables) {
        std::ofstream out(dir + "/" + t.name + ".csv");
        if (!out) throw config_error("cannot write " + dir + "/" + t.name + ".csv");
        for (std::size_t i = 0; i < t.header.size(); ++i) out << (i ? "," : "") << csv_escape(t.header[i]);
        out << '\n';
        for (const auto& row : t.rows) {
            for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << csv_escape(row[i]);
            out << '\n';
        }
    }
}

std::vector<std::string> validate_report(const json& doc) {
    std::vector<std::string> bad;
    auto need = [&](const char* key, json::value_t type) {
        const auto it = doc.find(key);
        if (it == doc.end())
            bad.push_back(std::string("missing ") + key);
        else if (it->type() != type && !(type == json::value_t::number_float && it->is_number()))
            bad.push_back(std::string("wrong type for ") + key);
    };
    if (!doc.is_object()) return {"report is not an object"};
    if (doc.value("schema", "") != run_schema) bad.push_back("schema tag");
    need("library_version", json::value_t::string);
    need("calibration_hash", json::value_t::string);
    need("config", json::value_t::object);
    need("dry_run", json::value_t::boolean);
    need("threshold_failures", json::value_t::array);
    if (bad.empty() && !doc["dry_run"].get<bool>()) {
        const auto exp = doc["config"].value("experiment", "");
        if (exp == "subsetsum")
            need("rows", json::value_t::array);
        else if (exp == "paths")
            need("families", json::value_t::array);
        else {
            need("seeds", json::value_t::array);
            need("aggregate", json::value_t::object);
            if (doc.contains("seeds"))
                for (const auto& s : doc["seeds"])
                    for (const char* k : {"sup_error", "fraction", "lambda", "success", "coefficients"})
                        if (!s.contains(k)) bad.push_back(std::string("seed report missing ") + k);
        }
    }
    return bad;
}

} // namespace ult
