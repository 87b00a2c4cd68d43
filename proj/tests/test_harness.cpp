#include "ult/calibrate.hpp"
#include "ult/config.hpp"
#include "ult/errors.hpp"
#include "ult/harness.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace ult;

namespace {

const char* linear_yaml = R"(experiment: linear
version: test
seeds: {count: 2, master: 7}
grid: 21
init: {family: uniform, sigma_w: [1.0, 0.5], bias: per_layer}
mother:
  widths: [2, 200, 1]
  kinds: [dense, dense]
target:
  W: [[1.5, -0.7]]
  b: [0.3]
  lo: [0.0, 0.0]
  hi: [1.0, 1.0]
prune: {eps: 0.02, delta: 0.1}
accept:
  min_success_rate: 0.5
)";

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("config parsing") {
    const auto c = parse_config(linear_yaml);
    CHECK(c.name == "linear");
    CHECK(c.seeds == 2);
    CHECK(c.master_seed == 7);
    CHECK(c.init.sigma_w == std::vector<double>{1.0, 0.5});
    CHECK(c.linear.target.W[0][1] == -0.7);
    CHECK(c.eps == 0.02);
    CHECK(*c.accept.min_success_rate == 0.5);

    const auto broadcast = parse_config(std::string(linear_yaml).replace(std::string(linear_yaml).find("[1.0, 0.5]"), 10, "1.5"));
    CHECK(broadcast.init.sigma_w == std::vector<double>{1.5, 1.5});
}

TEST_CASE("config errors carry line numbers") {
    std::string bad = linear_yaml;
    bad.replace(bad.find("grid: 21"), 8, "grdi: 21");
    try {
        parse_config(bad, "x.yaml");
        FAIL("expected a config error");
    } catch (const config_error& e) {
        const std::string msg = e.what();
        CHECK(msg.rfind("x.yaml:4:", 0) == 0);
        CHECK(msg.find("grdi") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_config("experiment: nonsense\n"), config_error);
    CHECK_THROWS_AS(parse_config("experiment: [\n"), config_error);
    CHECK_THROWS_AS(parse_config(std::string(linear_yaml) + "calibration: missing_file.yaml\n"), config_error);
}

TEST_CASE("linear runs are deterministic and well formed") {
    const auto c = parse_config(linear_yaml);
    const auto a = run(c);
    const auto b = run(c);
    CHECK(a.doc.dump() == b.doc.dump());
    CHECK(validate_report(a.doc).empty());
    CHECK(a.doc["seeds"].size() == 2u);
    CHECK(a.doc["dry_run"] == false);
    CHECK(run_seed(7, 0) != run_seed(7, 1));
    CHECK(run_seed(7, 1) == run_seed(7, 1));

    const auto dir = std::filesystem::temp_directory_path() / "ult_harness_test";
    std::filesystem::remove_all(dir);
    write_run(a, dir.string());
    CHECK(std::filesystem::exists(dir / "report.json"));
    CHECK(std::filesystem::exists(dir / "timing.json"));
    const auto back = json::parse(read_file(dir / "report.json"));
    CHECK(back.dump() == a.doc.dump());
    std::filesystem::remove_all(dir);
}

TEST_CASE("dry runs only validate") {
    std::string s = linear_yaml;
    s.replace(s.find("count: 2"), 8, "count: 0");
    const auto r = run(parse_config(s));
    CHECK(r.doc["dry_run"] == true);
    CHECK(validate_report(r.doc).empty());
}

TEST_CASE("report validation catches missing fields") {
    json doc = {{"schema", "ult-run/1"}};
    CHECK_FALSE(validate_report(doc).empty());
    CHECK(validate_report(json::array()).size() == 1u);
}

TEST_CASE("csv escaping") {
    CHECK(csv_escape("plain") == "plain");
    CHECK(csv_escape("a,b") == "\"a,b\"");
    CHECK(csv_escape("say \"hi\"") == "\"say \"\"hi\"\"\"");
}

TEST_CASE("subset-sum and path experiments") {
    const auto ss = run(parse_config(R"(experiment: subsetsum
subsetsum:
  distributions: [uniform]
  n: [10, 20]
  eps: [0.01]
  delta: [0.1]
  trials: 50
  strategy: exact
)"));
    REQUIRE(ss.tables.size() == 1u);
    CHECK(ss.tables[0].rows.size() == 2u);
    CHECK(validate_report(ss.doc).empty());

    const auto ps = run(parse_config(R"(experiment: paths
paths: {families: [uniform], steps: 3, trials: 500, budget: 160}
)"));
    CHECK(validate_report(ps.doc).empty());
    CHECK(ps.doc["families"].size() == 1u);
}

TEST_CASE("calibration file round trip") {
    const auto p = std::filesystem::temp_directory_path() / "ult_cal_test.yaml";
    store_calibration(p.string(), {{"subset_sum/uniform", 1.25}, {"subset_sum/normal", 2.5}});
    const auto back = load_calibration(p.string());
    CHECK(back.at("subset_sum/uniform") == 1.25);
    CHECK(back.at("subset_sum/normal") == 2.5);
    std::filesystem::remove(p);
    CHECK(constants_for(distribution::normal).alpha == 0.4);
    CHECK(parse_formula("subset_sum_extended") == formula_id::subset_sum_extended);
    CHECK_THROWS(parse_formula("other"));
}

TEST_CASE("calibration finds a constant that meets every grid point") {
    calibration_grid g;
    g.eps = {0.1, 0.05, 0.03};
    g.delta = {0.1, 0.2, 0.3};
    g.trials = 40;
    g.n_max = 40;
    const auto r = calibrate(distribution::uniform, formula_id::subset_sum, g, 3);
    REQUIRE(r.converged);
    CHECK(r.key == "subset_sum/uniform");
    CHECK(r.C >= 0.1);
    CHECK(r.C <= 100);
    REQUIRE(r.points.size() == 9u);
    for (const auto& p : r.points) {
        CHECK(p.success >= 1.0 - p.delta);
        CHECK(p.n_required == required_n(distribution::uniform, formula_id::subset_sum, 1.0, p.eps, p.delta, r.C));
    }
    g.eps = {0.1};
    CHECK_THROWS_AS(calibrate(distribution::uniform, formula_id::subset_sum, g, 3), config_error);
}
