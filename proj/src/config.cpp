#include "ult/config.hpp"

#include "ult/errors.hpp"

#include <yaml-cpp/yaml.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace ult {

namespace {

struct reader {
    std::string source;

    [[noreturn]] void fail(const YAML::Node& n, const std::string& msg) const {
        const auto mark = n.Mark();
        if (mark.line >= 0) throw config_error(source + ":" + std::to_string(mark.line + 1) + ": " + msg);
        throw config_error(source + ": " + msg);
    }

    void allow(const YAML::Node& map, const std::string& where, std::initializer_list<const char*> keys) const {
        if (!map.IsMap()) fail(map, where + " must be a mapping");
        std::set<std::string> ok(keys.begin(), keys.end());
        for (const auto& kv : map) {
            const auto k = kv.first.as<std::string>();
            if (!ok.count(k)) fail(kv.first, "unknown key '" + k + "' in " + where);
        }
    }

    template <class T>
    T get(const YAML::Node& n, const std::string& what) const {
        try {
            return n.as<T>();
        } catch (const YAML::Exception&) {
            fail(n, "bad value for " + what);
        }
    }

    template <class T>
    void opt(const YAML::Node& map, const char* key, T& out) const {
        const auto n = map[key];
        if (n) out = get<T>(n, key);
    }

    template <class T>
    std::vector<T> list(const YAML::Node& n, const std::string& what) const {
        if (!n.IsSequence()) fail(n, what + " must be a list");
        std::vector<T> out;
        for (const auto& e : n) out.push_back(get<T>(e, what));
        return out;
    }

    template <class T>
    std::vector<std::vector<T>> matrix(const YAML::Node& n, const std::string& what) const {
        if (!n.IsSequence()) fail(n, what + " must be a list of lists");
        std::vector<std::vector<T>> out;
        for (const auto& row : n) out.push_back(list<T>(row, what));
        return out;
    }
};

template <class Fn>
auto guarded(const reader& r, const YAML::Node& n, Fn&& fn) {
    try {
        return fn();
    } catch (const config_error&) {
        throw;
    } catch (const std::exception& e) {
        r.fail(n, e.what());
    }
}

} // namespace

experiment_config parse_config(const std::string& text, const std::string& source) {
    reader r{source};
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw config_error(source + ":" + std::to_string(e.mark.line + 1) + ": " + e.msg);
    }
    if (!root || !root.IsMap()) throw config_error(source + ": config must be a mapping");
    r.allow(root, "config",
            {"experiment", "version", "seeds", "grid", "init", "mother", "family", "target", "subsetsum", "paths",
             "prune", "calibration", "universality", "accept", "output"});

    experiment_config c;
    c.source = source;
    if (!root["experiment"]) r.fail(root, "missing 'experiment'");
    c.name = r.get<std::string>(root["experiment"], "experiment");
    static const std::set<std::string> names{"poly", "fourier", "subsetsum", "paths", "linear"};
    if (!names.count(c.name)) r.fail(root["experiment"], "unknown experiment '" + c.name + "'");
    r.opt(root, "version", c.version);

    if (const auto s = root["seeds"]) {
        r.allow(s, "seeds", {"count", "master"});
        r.opt(s, "count", c.seeds);
        r.opt(s, "master", c.master_seed);
        if (c.seeds < 0) r.fail(s, "seed count must be >= 0");
    }
    r.opt(root, "grid", c.grid);
    if (c.grid < 2) r.fail(root["grid"], "grid must be >= 2");

    if (const auto n = root["init"]) {
        r.allow(n, "init", {"family", "sigma_w", "bias"});
        guarded(r, n, [&] {
            if (n["family"]) c.init.family = parse_init_family(r.get<std::string>(n["family"], "init.family"));
            if (n["bias"]) c.init.bias = parse_bias_convention(r.get<std::string>(n["bias"], "init.bias"));
            return 0;
        });
        if (const auto s = n["sigma_w"]) {
            if (s.IsSequence())
                c.init.sigma_w = r.list<double>(s, "init.sigma_w");
            else
                c.init.sigma_w = {r.get<double>(s, "init.sigma_w")};
        }
    }

    if (const auto n = root["mother"]) {
        r.allow(n, "mother", {"widths", "kinds", "output_activation"});
        c.has_mother = true;
        c.mother.widths = r.list<int>(n["widths"], "mother.widths");
        guarded(r, n, [&] {
            for (const auto& k : r.list<std::string>(n["kinds"], "mother.kinds")) c.mother.kinds.push_back(parse_layer_kind(k));
            if (n["output_activation"])
                c.mother.output_activation = parse_activation(r.get<std::string>(n["output_activation"], "output_activation"));
            c.mother.validate();
            return 0;
        });
        if (c.init.sigma_w.size() == 1) c.init.sigma_w.assign(c.mother.kinds.size(), c.init.sigma_w.front());
        if (c.init.sigma_w.empty()) c.init.sigma_w.assign(c.mother.kinds.size(), 2.0);
        if (c.init.sigma_w.size() != c.mother.kinds.size()) r.fail(n, "init.sigma_w needs one entry per layer");
    }

    if (const auto n = root["family"]) {
        r.allow(n, "family",
                {"d", "exponents", "integer_exponents", "N_log", "N_exp", "freqs", "phases", "N_sin", "eps", "delta", "m"});
        if (c.name == "poly") {
            auto& p = c.poly;
            r.opt(n, "d", p.d);
            if (n["exponents"]) p.exponents = r.matrix<double>(n["exponents"], "family.exponents");
            r.opt(n, "integer_exponents", p.integer_exponents);
            r.opt(n, "N_log", p.N_log);
            r.opt(n, "N_exp", p.N_exp);
            r.opt(n, "eps", p.eps);
            r.opt(n, "delta", p.delta);
            r.opt(n, "m", p.m);
            guarded(r, n, [&] { p.validate(); return 0; });
        } else if (c.name == "fourier") {
            auto& f = c.fourier;
            r.opt(n, "d", f.d);
            if (n["freqs"]) f.freqs = r.matrix<int>(n["freqs"], "family.freqs");
            if (n["phases"]) f.phases = r.list<double>(n["phases"], "family.phases");
            r.opt(n, "N_sin", f.N_sin);
            r.opt(n, "eps", f.eps);
            r.opt(n, "delta", f.delta);
            r.opt(n, "m", f.m);
            guarded(r, n, [&] { f.validate(); return 0; });
        } else {
            r.fail(n, "'family' only applies to poly and fourier experiments");
        }
    }

    if (const auto n = root["target"]) {
        r.allow(n, "target", {"W", "b", "lo", "hi"});
        auto& t = c.linear.target;
        t.W = r.matrix<double>(n["W"], "target.W");
        t.b = r.list<double>(n["b"], "target.b");
        const std::size_t d = t.W.empty() ? 0 : t.W.front().size();
        t.lo = n["lo"] ? r.list<double>(n["lo"], "target.lo") : std::vector<double>(d, 0.0);
        t.hi = n["hi"] ? r.list<double>(n["hi"], "target.hi") : std::vector<double>(d, 1.0);
        guarded(r, n, [&] { t.validate(); return 0; });
    }

    if (const auto n = root["subsetsum"]) {
        r.allow(n, "subsetsum", {"distributions", "n", "eps", "delta", "m", "trials", "strategy", "max_subset"});
        auto& s = c.subsetsum;
        guarded(r, n, [&] {
            for (const auto& d : r.list<std::string>(n["distributions"], "subsetsum.distributions"))
                s.distributions.push_back(parse_distribution(d));
            if (n["strategy"]) s.strategy = parse_strategy(r.get<std::string>(n["strategy"], "strategy"));
            return 0;
        });
        s.n = r.list<int>(n["n"], "subsetsum.n");
        s.eps = r.list<double>(n["eps"], "subsetsum.eps");
        if (n["delta"]) s.delta = r.list<double>(n["delta"], "subsetsum.delta");
        r.opt(n, "m", s.m);
        r.opt(n, "trials", s.trials);
        r.opt(n, "max_subset", s.max_subset);
        if (s.trials < 1) r.fail(n, "subsetsum.trials must be >= 1");
    }

    if (const auto n = root["paths"]) {
        r.allow(n, "paths", {"families", "steps", "trials", "budget"});
        auto& p = c.paths;
        guarded(r, n, [&] {
            for (const auto& f : r.list<std::string>(n["families"], "paths.families")) p.families.push_back(parse_init_family(f));
            return 0;
        });
        r.opt(n, "steps", p.steps);
        r.opt(n, "trials", p.trials);
        r.opt(n, "budget", p.budget);
    }

    if (const auto n = root["prune"]) {
        r.allow(n, "prune",
                {"eps", "delta", "ground_size", "min_ground_size", "max_subset", "path_budget", "shared_pools"});
        r.opt(n, "eps", c.eps);
        r.opt(n, "delta", c.delta);
        r.opt(n, "ground_size", c.prune.ground_size);
        r.opt(n, "min_ground_size", c.prune.min_ground_size);
        r.opt(n, "max_subset", c.prune.max_subset);
        r.opt(n, "path_budget", c.prune.path_budget);
        r.opt(n, "shared_pools", c.prune.shared_pools);
        if (!(c.eps > 0 && c.eps < 1 && c.delta > 0 && c.delta < 1)) r.fail(n, "prune eps and delta must lie in (0,1)");
        if (c.prune.ground_size < 1 || c.prune.max_subset < 1 || c.prune.path_budget < 1)
            r.fail(n, "prune sizes must be >= 1");
    }
    c.prune.grid_points = c.grid;

    if (const auto n = root["calibration"]) {
        auto p = std::filesystem::path(r.get<std::string>(n, "calibration"));
        if (p.is_relative() && source.front() != '<') p = std::filesystem::path(source).parent_path() / p;
        c.calibration_file = p.lexically_normal().string();
        if (!std::filesystem::exists(c.calibration_file)) r.fail(n, "calibration file not found: " + c.calibration_file);
    }

    if (const auto n = root["universality"]) {
        r.allow(n, "universality", {"combos", "fit_grid", "eval_grid"});
        r.opt(n, "combos", c.universality.combos);
        r.opt(n, "fit_grid", c.universality.fit_grid);
        r.opt(n, "eval_grid", c.universality.eval_grid);
    }

    if (const auto n = root["accept"]) {
        r.allow(n, "accept", {"median_error", "fraction", "runtime_s", "min_success_rate", "min_universality"});
        auto& a = c.accept;
        if (n["median_error"]) a.median_error = r.get<double>(n["median_error"], "accept.median_error");
        if (n["fraction"]) {
            const auto f = r.list<double>(n["fraction"], "accept.fraction");
            if (f.size() != 2) r.fail(n["fraction"], "accept.fraction must be [lo, hi]");
            a.fraction_lo = f[0];
            a.fraction_hi = f[1];
        }
        if (n["runtime_s"]) a.runtime_s = r.get<double>(n["runtime_s"], "accept.runtime_s");
        if (n["min_success_rate"]) a.min_success_rate = r.get<double>(n["min_success_rate"], "accept.min_success_rate");
        if (n["min_universality"]) a.min_universality = r.get<double>(n["min_universality"], "accept.min_universality");
    }

    if (const auto n = root["output"]) {
        r.allow(n, "output", {"dir"});
        r.opt(n, "dir", c.out_dir);
    }

    const bool needs_mother = c.name == "poly" || c.name == "fourier" || c.name == "linear";
    if (needs_mother && !c.has_mother) r.fail(root, "experiment '" + c.name + "' needs a 'mother' section");
    if ((c.name == "poly" || c.name == "fourier") && !root["family"])
        r.fail(root, "experiment '" + c.name + "' needs a 'family' section");
    if (c.name == "linear" && !root["target"]) r.fail(root, "experiment 'linear' needs a 'target' section");
    if (c.name == "subsetsum" && !root["subsetsum"]) r.fail(root, "experiment 'subsetsum' needs a 'subsetsum' section");
    if (c.name == "paths" && !root["paths"]) r.fail(root, "experiment 'paths' needs a 'paths' section");
    return c;
}

experiment_config load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path);
}

} // namespace ult
