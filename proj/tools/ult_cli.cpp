#include "ult/calibrate.hpp"
#include "ult/config.hpp"
#include "ult/errors.hpp"
#include "ult/harness.hpp"
#include "ult/init.hpp"
#include "ult/json_io.hpp"
#include "ult/kernels.hpp"
#include "ult/prune.hpp"

#include <CLI11.hpp>

#include <omp.h>

#include <filesystem>
#include <iostream>
#include <sstream>

using namespace ult;

namespace {

std::vector<double> parse_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
    return out;
}

target_fn target_function(const target_file& t, const mother_net& net) {
    const bool relu = net.arch().output_activation == activation::relu;
    if (t.kind == "linear")
        return [&t, relu](const double* x, double* y) {
            for (int i = 0; i < t.linear.m(); ++i) {
                double acc = t.linear.b[static_cast<std::size_t>(i)];
                for (int j = 0; j < t.linear.d(); ++j)
                    acc += t.linear.W[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] * x[j];
                y[i] = relu ? std::max(acc, 0.0) : acc;
            }
        };
    return [&t](const double* x, double* y) { y[0] = eval(t.rep, x[0]); };
}

probe_grid target_grid(const target_file& t, long per_dim) {
    if (t.kind == "linear") return probe_grid(t.linear.lo, t.linear.hi, per_dim);
    return probe_grid({t.lo}, {t.hi}, per_dim);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Strong universal lottery tickets: construct, prune, verify, fit, calibrate, reproduce"};
    app.require_subcommand(1);

    std::string config_path, out, net_path, mask_path, target_path, report_path, coeffs;
    std::uint64_t seed = 0;
    int seeds = -1, jobs = 0;
    long grid = 0;
    double eps = 0.01, delta = 0.1;
    bool seed_given = false;

    auto* construct = app.add_subcommand("construct", "Sample a mother network from a config");
    construct->add_option("--config", config_path, "Experiment config with mother and init sections")->required();
    construct->add_option("--seed", seed, "Init seed");
    construct->add_option("--out", out, "Output net JSON")->required();

    auto* prune = app.add_subcommand("prune", "Prune a mother network to a target");
    prune->add_option("--net", net_path, "Mother net JSON")->required();
    prune->add_option("--target", target_path, "Target JSON (linear or univariate)")->required();
    prune->add_option("--eps", eps, "Error tolerance");
    prune->add_option("--delta", delta, "Failure probability");
    prune->add_option("--config", config_path, "Config whose prune section sets the options");
    prune->add_option("--grid", grid, "Probes per input dimension");
    prune->add_option("--out", out, "Output directory")->required();

    auto* verify = app.add_subcommand("verify", "Recompute the sup error of a ticket");
    verify->add_option("--net", net_path, "Mother net JSON")->required();
    verify->add_option("--mask", mask_path, "Mask JSON")->required();
    verify->add_option("--target", target_path, "Target JSON")->required();
    verify->add_option("--report", report_path, "Ticket report to compare against");
    verify->add_option("--grid", grid, "Probes per input dimension");

    auto* fit = app.add_subcommand("fit", "Refit the last layer of a family ticket to a combination of its basis");
    fit->add_option("--config", config_path, "poly or fourier config")->required();
    fit->add_option("--seed", seed, "Master seed override");
    fit->add_option("--coeffs", coeffs, "a_1,...,a_k,d0")->required();
    fit->add_option("--grid", grid, "Fit grid per dimension");

    std::string dist = "uniform_product", formula = "subset_sum", eps_list = "0.001,0.003,0.01",
                delta_list = "0.05,0.1,0.2";
    int trials = 200;
    auto* calibrate_cmd = app.add_subcommand("calibrate", "Calibrate the constant C of a width formula");
    calibrate_cmd->add_option("--distribution", dist, "uniform | normal | uniform_product | normal_product");
    calibrate_cmd->add_option("--formula", formula, "subset_sum | subset_sum_extended");
    calibrate_cmd->add_option("--eps", eps_list, "Comma separated eps grid");
    calibrate_cmd->add_option("--delta", delta_list, "Comma separated delta grid");
    calibrate_cmd->add_option("--trials", trials, "Trials per eps");
    calibrate_cmd->add_option("--seed", seed, "Master seed");
    calibrate_cmd->add_option("--out", out, "Calibration YAML to update");

    auto* reproduce = app.add_subcommand("reproduce", "Run a shipped experiment");
    reproduce->require_subcommand(1);
    for (const char* name : {"poly", "fourier", "subsetsum", "paths", "linear"}) {
        auto* sub = reproduce->add_subcommand(name, std::string("Run the ") + name + " experiment");
        sub->add_option("--config", config_path, "Config file (default configs/<name>_v1.yaml)");
        sub->add_option("--seed", seed, "Master seed override")->each([&](const std::string&) { seed_given = true; });
        sub->add_option("--seeds", seeds, "Seed count override (0 = dry run)");
        sub->add_option("--out", out, "Output directory");
        sub->add_option("--grid", grid, "Probes per input dimension");
        sub->add_option("--jobs", jobs, "Worker threads");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*construct) {
            auto cfg = load_config(config_path);
            if (!cfg.has_mother) throw config_error("config has no mother section");
            auto spec = cfg.init;
            spec.seed = seed;
            write_json_file(out, to_json(sample(cfg.mother, spec)));
            std::cout << "wrote " << out << '\n';
            return 0;
        }
        if (*prune) {
            const auto net = net_from_json(read_json_file(net_path));
            const auto t = target_from_json(read_json_file(target_path));
            prune_options opt;
            if (!config_path.empty()) opt = load_config(config_path).prune;
            if (grid > 0) opt.grid_points = grid;
            const auto rep = t.kind == "linear" ? prune_linear(net, t.linear, eps, delta, opt)
                                                : prune_univariate(net, t.rep, t.lo, t.hi, eps, delta, opt);
            std::filesystem::create_directories(out);
            write_json_file(out + "/mask.json", to_json(rep.mask));
            write_json_file(out + "/report.json", to_json(rep));
            std::cout << "sup_error " << rep.sup_error << " fraction " << rep.fraction << " success " << rep.success << '\n';
            return rep.success ? 0 : 1;
        }
        if (*verify) {
            const auto net = net_from_json(read_json_file(net_path));
            const auto mask = mask_from_json(read_json_file(mask_path));
            const auto t = target_from_json(read_json_file(target_path));
            long per_dim = grid;
            json rep;
            if (!report_path.empty()) {
                rep = read_json_file(report_path);
                if (per_dim <= 0) {
                    const long pts = rep.value("grid_points", 0L);
                    const int d = t.kind == "linear" ? t.linear.d() : 1;
                    per_dim = d == 1 ? pts : static_cast<long>(std::llround(std::pow(static_cast<double>(pts), 1.0 / d)));
                    if (d > 2) per_dim = pts;
                }
            }
            if (per_dim <= 0) per_dim = 10000;
            const auto r = recompute_error(net, mask, target_grid(t, per_dim), target_function(t, net));
            std::cout.precision(17);
            std::cout << "sup_error " << r.err << " fraction " << surviving_fraction(net, mask) << '\n';
            if (!report_path.empty()) {
                const double reported = rep.at("sup_error").get<double>();
                const bool same = reported == r.err;
                std::cout << (same ? "matches report" : "DIFFERS from report") << " (" << reported << ")\n";
                return same ? 0 : 1;
            }
            return 0;
        }
        if (*fit) {
            auto cfg = load_config(config_path);
            if (cfg.name != "poly" && cfg.name != "fourier") throw config_error("fit needs a poly or fourier config");
            if (fit->count("--seed")) cfg.master_seed = seed;
            cfg.seeds = 1;
            cfg.universality.combos = 0;
            if (grid > 0) cfg.universality.fit_grid = grid;
            const auto target = cfg.name == "poly" ? build_poly_target(cfg.poly) : build_fourier_target(cfg.fourier);
            const auto a = parse_list(coeffs);
            if (static_cast<int>(a.size()) != target.k + 1) throw config_error("--coeffs needs k + 1 values");
            auto spec = cfg.init;
            spec.seed = run_seed(cfg.master_seed, 0);
            const auto net = sample(cfg.mother, spec);
            const auto fr = prune_family(target, net, cfg.grid, cfg.prune);
            const sparse_net sn(net, fr.ticket.mask);
            auto collect = [&](long per_dim, std::vector<std::vector<double>>& F, std::vector<std::vector<double>>& Y) {
                const auto g = probe_grid::unit(target.d, per_dim);
                std::vector<double> x(static_cast<std::size_t>(target.d)), b(static_cast<std::size_t>(target.k));
                for (long i = 0; i < g.size(); ++i) {
                    g.point(i, x.data());
                    auto y = sn.eval(x);
                    for (auto& v : y) v *= fr.ticket.lambda;
                    F.push_back(y);
                    target.eval_basis(x.data(), b.data());
                    double s = a.back();
                    for (int j = 0; j < target.k; ++j) s += a[static_cast<std::size_t>(j)] * (b[static_cast<std::size_t>(j)] - target.outer_shift);
                    Y.push_back({s});
                }
            };
            std::vector<std::vector<double>> F, Y, F2, Y2;
            collect(cfg.universality.fit_grid, F, Y);
            collect(cfg.universality.eval_grid, F2, Y2);
            auto res = fit_last_layer(F, Y);
            res.residual = fit_residual(res, F2, Y2);
            std::cout << to_json(res).dump(2) << '\n';
            const double family_eps = cfg.name == "poly" ? cfg.poly.eps : cfg.fourier.eps;
            return res.residual <= family_eps ? 0 : 1;
        }
        if (*calibrate_cmd) {
            calibration_grid g;
            g.eps = parse_list(eps_list);
            g.delta = parse_list(delta_list);
            g.trials = trials;
            const auto r = calibrate(parse_distribution(dist), parse_formula(formula), g, seed);
            std::cout << r.key << " C = " << r.C << '\n';
            if (!out.empty()) {
                std::map<std::string, double> values;
                if (std::filesystem::exists(out)) values = load_calibration(out);
                values[r.key] = r.C;
                store_calibration(out, values);
            }
            return 0;
        }
        if (*reproduce) {
            const auto* sub = reproduce->get_subcommands().front();
            const std::string name = sub->get_name();
            if (config_path.empty()) config_path = "configs/" + name + "_v1.yaml";
            auto cfg = load_config(config_path);
            if (cfg.name != name) throw config_error(config_path + " is a '" + cfg.name + "' config, not '" + name + "'");
            if (seed_given) cfg.master_seed = seed;
            if (seeds >= 0) cfg.seeds = seeds;
            if (grid > 0) cfg.grid = cfg.prune.grid_points = grid;
            if (!out.empty()) cfg.out_dir = out;
            const auto r = run(cfg, jobs);
            const auto problems = validate_report(r.doc);
            for (const auto& p : problems) std::cerr << "report schema: " << p << '\n';
            write_run(r, cfg.out_dir);
            std::cout << "wrote " << cfg.out_dir << "/report.json";
            if (r.doc.contains("aggregate")) std::cout << "\n" << r.doc["aggregate"].dump();
            std::cout << '\n';
            for (const auto& f : r.threshold_failures) std::cout << "threshold: " << f << '\n';
            return problems.empty() && r.accepted ? 0 : 1;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
