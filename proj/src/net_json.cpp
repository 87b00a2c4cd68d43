#include "ult/json_io.hpp"

#include "ult/errors.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

namespace ult {

namespace {

void expect_schema(const json& j, const char* schema) {
    if (!j.is_object()) throw config_error(std::string("expected a JSON object with schema ") + schema);
    const auto it = j.find("schema");
    if (it == j.end() || *it != schema)
        throw config_error(std::string("expected schema ") + schema);
}

template <class T>
T field(const json& j, const char* key) {
    const auto it = j.find(key);
    if (it == j.end()) throw config_error(std::string("missing field '") + key + "'");
    try {
        return it->get<T>();
    } catch (const json::exception& e) {
        throw config_error(std::string("field '") + key + "': " + e.what());
    }
}

} // namespace

json to_json(const mother_net& net) {
    json j;
    j["schema"] = net_schema;
    j["widths"] = net.arch().widths;
    json kinds = json::array();
    for (auto k : net.arch().kinds) kinds.push_back(to_string(k));
    j["kinds"] = kinds;
    j["output_activation"] = to_string(net.arch().output_activation);
    j["sigma_w"] = net.sigma_w();
    json layers = json::array();
    for (int l = 1; l <= net.depth(); ++l) layers.push_back({{"w", net.at(l).w}, {"b", net.at(l).b}});
    j["layers"] = layers;
    return j;
}

mother_net net_from_json(const json& j) {
    expect_schema(j, net_schema);
    architecture a;
    a.widths = field<std::vector<int>>(j, "widths");
    for (const auto& k : field<std::vector<std::string>>(j, "kinds")) a.kinds.push_back(parse_layer_kind(k));
    a.output_activation = parse_activation(field<std::string>(j, "output_activation"));
    mother_net net(a, field<std::vector<double>>(j, "sigma_w"));
    const auto& layers = j.at("layers");
    if (!layers.is_array() || static_cast<int>(layers.size()) != net.depth())
        throw shape_error("layer count does not match kinds");
    for (int l = 1; l <= net.depth(); ++l) {
        auto w = field<std::vector<double>>(layers[static_cast<std::size_t>(l - 1)], "w");
        auto b = field<std::vector<double>>(layers[static_cast<std::size_t>(l - 1)], "b");
        if (w.size() != net.at(l).w.size() || b.size() != net.at(l).b.size())
            throw shape_error("layer " + std::to_string(l) + " parameter count does not match architecture");
        net.at(l).w = std::move(w);
        net.at(l).b = std::move(b);
    }
    return net;
}

json to_json(const prune_mask& mask) {
    json j;
    j["schema"] = mask_schema;
    j["param_count"] = mask.bits.size();
    j["bits"] = mask.bits;
    return j;
}

prune_mask mask_from_json(const json& j) {
    expect_schema(j, mask_schema);
    prune_mask m;
    m.bits = field<std::vector<std::uint8_t>>(j, "bits");
    if (m.bits.size() != field<std::size_t>(j, "param_count")) throw shape_error("mask bit count mismatch");
    for (auto b : m.bits)
        if (b > 1) throw shape_error("mask bits must be 0 or 1");
    return m;
}

json to_json(const pwl_rep& rep) { return {{"knots", rep.knots}, {"coeffs", rep.coeffs}}; }

pwl_rep pwl_from_json(const json& j) {
    pwl_rep r;
    r.knots = field<std::vector<double>>(j, "knots");
    r.coeffs = field<std::vector<double>>(j, "coeffs");
    r.validate();
    return r;
}

json to_json(const linear_target& t) { return {{"W", t.W}, {"b", t.b}, {"lo", t.lo}, {"hi", t.hi}}; }

linear_target linear_from_json(const json& j) {
    linear_target t;
    t.W = field<std::vector<std::vector<double>>>(j, "W");
    t.b = field<std::vector<double>>(j, "b");
    const std::size_t d = t.W.empty() ? 0 : t.W.front().size();
    t.lo = j.contains("lo") ? field<std::vector<double>>(j, "lo") : std::vector<double>(d, 0.0);
    t.hi = j.contains("hi") ? field<std::vector<double>>(j, "hi") : std::vector<double>(d, 1.0);
    t.validate();
    return t;
}

target_file target_from_json(const json& j) {
    expect_schema(j, target_schema);
    target_file t;
    t.kind = field<std::string>(j, "kind");
    if (t.kind == "linear") {
        t.linear = linear_from_json(j);
    } else if (t.kind == "univariate") {
        t.rep = pwl_from_json(j);
        t.lo = j.contains("lo") ? field<double>(j, "lo") : t.rep.lo();
        t.hi = j.contains("hi") ? field<double>(j, "hi") : t.rep.hi();
    } else {
        throw config_error("unknown target kind '" + t.kind + "'");
    }
    return t;
}

json to_json(const target_file& t) {
    json j;
    j["schema"] = target_schema;
    j["kind"] = t.kind;
    if (t.kind == "linear") {
        for (auto& [k, v] : to_json(t.linear).items()) j[k] = v;
    } else {
        for (auto& [k, v] : to_json(t.rep).items()) j[k] = v;
        j["lo"] = t.lo;
        j["hi"] = t.hi;
    }
    return j;
}

json to_json(const ticket_report& r) {
    json j;
    j["lambda"] = r.lambda;
    j["eps"] = r.eps;
    j["delta"] = r.delta;
    j["sup_error"] = r.sup_error;
    j["grid_points"] = r.grid_points;
    j["fraction"] = r.fraction;
    j["kept"] = r.mask.count();
    j["param_count"] = r.mask.bits.size();
    j["param_convention"] = "weights and biases, shared blocks counted once";
    j["budget_violations"] = r.budget_violations;
    j["success"] = r.success;
    j["failures"] = r.failures;
    j["notes"] = r.notes;
    json coefs = json::array();
    for (const auto& c : r.coefficients)
        coefs.push_back({{"name", c.name},
                         {"target", c.target},
                         {"achieved", c.achieved},
                         {"error", c.error},
                         {"budget", c.budget},
                         {"ground", c.ground},
                         {"chosen", c.chosen},
                         {"within_budget", c.within_budget}});
    j["coefficients"] = coefs;
    json paths = json::array();
    for (const auto& p : r.paths)
        paths.push_back({{"layers", p.layers}, {"neurons", p.neurons}, {"weights", p.weights}, {"product", p.product}, {"ok", p.ok}});
    j["paths"] = paths;
    json classes = json::array();
    for (const auto& c : r.classes)
        classes.push_back({{"layer", c.layer}, {"neuron", c.neuron}, {"kind", c.kind}, {"source", c.source}});
    j["classes"] = classes;
    return j;
}

json to_json(const stage_sheet& s) {
    return {{"name", s.name}, {"eps", s.eps}, {"delta", s.delta}, {"N", s.N}, {"M", s.M}, {"Q", s.Q}};
}

json to_json(const family_report& r) {
    json j = to_json(r.ticket);
    j["basis_error"] = r.basis_error;
    j["approximation_error"] = r.approximation_error;
    j["pruning_budget"] = r.pruning_budget;
    return j;
}

json to_json(const fit_result& r) {
    return {{"W", r.W},
            {"c", r.c},
            {"residual", r.residual},
            {"condition", r.condition},
            {"rank_deficient", r.rank_deficient},
            {"warning", r.warning}};
}

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw config_error(path + ": " + e.what());
    }
}

void write_json_file(const std::string& path, const json& j) {
    const auto parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    std::ofstream out(path);
    if (!out) throw config_error("cannot write " + path);
    out << j.dump(2) << '\n';
}

} // namespace ult
