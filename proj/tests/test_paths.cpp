#include "helpers.hpp"

#include "ult/errors.hpp"
#include "ult/paths.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace ult;
using namespace testing_util;

TEST_CASE("acceptance window") {
    CHECK(path_accepts(1.0, 1.0));
    CHECK(path_accepts(4.0 / 3.0, 1.0));
    CHECK_FALSE(path_accepts(0.99, 1.0));
    CHECK_FALSE(path_accepts(1.34, 1.0));
    CHECK_FALSE(path_accepts(-1.1, 1.0));
    CHECK(path_accepts(0.9, 1.2));   // window [0.8333, 1.1111]
    CHECK_FALSE(path_accepts(1.2, 1.2));
    CHECK(path_product_in_range(1.0));
    CHECK(path_product_in_range(4.0 / 3.0));
    CHECK_FALSE(path_product_in_range(1.34));
}

TEST_CASE("property: accepted products stay in [1, 1/alpha]") {
    std::mt19937_64 g(21);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 2000; ++t) {
        double p = 1.0;
        for (int j = 0; j < 30; ++j) {
            const double w = 1.0 / p + u(g) * (1.0 / (path_alpha * p) - 1.0 / p);
            REQUIRE(path_accepts(w, p));
            p *= w;
            CHECK(path_product_in_range(p));
        }
    }
}

TEST_CASE("first step frequencies match closed forms") {
    // Uniform[-2,2]: P(w in [1, 4/3]) = (1/3) / 4.
    const auto u = simulate_paths(init_family::uniform, 1, 200000, 1, 3);
    CHECK(u.step_frequency(0) == doctest::Approx(1.0 / 12.0).epsilon(0.03));
    // N(0, 4): Phi(2/3) - Phi(1/2).
    const double phi = 0.5 * (std::erf((2.0 / 3.0) / std::sqrt(2.0)) - std::erf(0.5 / std::sqrt(2.0)));
    const auto n = simulate_paths(init_family::normal, 1, 200000, 1, 3);
    CHECK(n.step_frequency(0) == doctest::Approx(phi).epsilon(0.03));
}

TEST_CASE("simulated paths complete with a generous budget") {
    const auto r = simulate_paths(init_family::uniform, 8, 2000, 400, 5);
    CHECK(r.completed == r.paths);
    CHECK(r.products_in_range);
    CHECK(r.min_product >= 1.0 - 1e-12);
    CHECK(r.max_product <= 4.0 / 3.0 + 1e-12);
    for (int j = 0; j < 8; ++j) CHECK(r.step_frequency(j) >= 1.0 / 16.0 - 0.01);
}

TEST_CASE("find_path on a hand-built net") {
    // sigma = 2 everywhere so stored weights are canonical.
    mother_net n(dense_arch({1, 3, 3, 1}), {});
    n.at(1).w = {0.5, 1.1, 1.2};      // neuron 1 is the first accepted
    n.at(2).w = {0, 0.5, 0,           // row 0 reads neuron 1 with 0.5: rejected
                 0, 0.95, 0,          // row 1: 1.1 * 0.95 = 1.045, accepted
                 0, 1.0, 0};
    n.at(3).w = {0, 0, 0.5};
    auto r = find_path(n, 0, 2, 3);
    REQUIRE(r.ok);
    CHECK(r.neurons == std::vector<int>{0, 1, 1});
    CHECK(r.product == doctest::Approx(1.1 * 0.95));

    std::vector<std::vector<char>> claimed{{0}, {0, 0, 0}, {0, 0, 0}, {0}};
    r = find_path(n, 0, 2, 3, 0, &claimed);
    REQUIRE(r.ok);
    CHECK(claimed[1][1] == 1);
    CHECK(claimed[2][1] == 1);
    // Second path must avoid the claimed neurons: layer 1 offers neuron 2 (1.2), then
    // layer 2 reads column 2 which is all zero, so it fails.
    const auto r2 = find_path(n, 0, 2, 3, 0, &claimed);
    CHECK_FALSE(r2.ok);
    CHECK(r2.neurons == std::vector<int>{0, 2});

    // A budget of one candidate per layer misses neuron 1.
    CHECK_FALSE(find_path(n, 0, 1, 1).ok);
    CHECK_THROWS_AS(find_path(n, 2, 1, 3), domain_error);
}

TEST_CASE("find_path reads weights in the canonical frame") {
    mother_net n(dense_arch({1, 1, 1}), {1.0, 4.0});
    n.at(1).w = {0.6}; // canonical 1.2
    n.at(2).w = {2.0}; // canonical 1.0 -> product 1.2
    const auto r = find_path(n, 0, 2, 1);
    REQUIRE(r.ok);
    CHECK(r.product == doctest::Approx(1.2));
}
