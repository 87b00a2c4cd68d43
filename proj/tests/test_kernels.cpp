#include "helpers.hpp"

#include "ult/errors.hpp"
#include "ult/kernels.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

using namespace ult;
using namespace testing_util;

TEST_CASE("tensor grids") {
    const probe_grid g1({-1.0}, {3.0}, 5);
    CHECK(g1.size() == 5);
    CHECK_FALSE(g1.sobol());
    double x = 0;
    g1.point(0, &x);
    CHECK(x == -1.0);
    g1.point(2, &x);
    CHECK(x == 1.0);
    g1.point(4, &x);
    CHECK(x == 3.0);

    const auto g2 = probe_grid::unit(2, 3);
    CHECK(g2.size() == 9);
    double p[2];
    g2.point(5, p); // first axis varies fastest
    CHECK(p[0] == 1.0);
    CHECK(p[1] == 0.5);
    CHECK_THROWS_AS(probe_grid({0.0}, {1.0}, 1), domain_error);
    CHECK_THROWS_AS(probe_grid({0.0}, {1.0, 2.0}, 3), shape_error);
}

TEST_CASE("sobol grids above two dimensions") {
    const probe_grid g({0, 0, 0, 0}, {1, 2, 1, 1}, 512);
    CHECK(g.sobol());
    CHECK(g.size() == 512);
    std::set<std::vector<double>> seen;
    std::vector<double> x(4);
    double mean1 = 0;
    for (long i = 0; i < g.size(); ++i) {
        g.point(i, x.data());
        for (int k = 0; k < 4; ++k) CHECK(x[static_cast<std::size_t>(k)] >= 0.0);
        CHECK(x[1] <= 2.0);
        mean1 += x[1];
        seen.insert(x);
    }
    CHECK(seen.size() == 512u);
    CHECK(mean1 / 512 == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("serial, parallel and dense sup errors agree exactly") {
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
        const int d = 1 + static_cast<int>(seed % 3);
        const auto n = random_net(dense_arch({d, 30, 30, 2}), seed);
        std::mt19937_64 g(seed);
        std::bernoulli_distribution keep(0.3);
        auto m = prune_mask::all(n, false);
        for (auto& b : m.bits) b = keep(g);
        const sparse_net sn(n, m);
        const auto grid = probe_grid::unit(d, d == 3 ? 4000 : (d == 2 ? 60 : 3000));
        const target_fn f = [d](const double* x, double* y) {
            double s = 0;
            for (int k = 0; k < d; ++k) s += x[k];
            y[0] = std::sin(s);
            y[1] = s * s;
        };
        const auto a = serial::sup_error(sn, 0.7, grid, f);
        const auto b = parallel::sup_error(sn, 0.7, grid, f);
        const auto c = sup_error_dense(n, m, 0.7, grid, f);
        CHECK(a.err == b.err);
        CHECK(a.argmax == b.argmax);
        CHECK(a.err == c.err);
        CHECK(a.argmax == c.argmax);
    }
}

TEST_CASE("sup error oracle on a constant net") {
    mother_net n(dense_arch({1, 1}), {});
    n.at(1).b = {0.5};
    auto m = prune_mask::all(n, true);
    const sparse_net sn(n, m);
    const probe_grid g({0.0}, {1.0}, 11);
    // |2 * 0.5 - x| peaks at x = 0.
    const auto r = parallel::sup_error(sn, 2.0, g, [](const double* x, double* y) { y[0] = x[0]; });
    CHECK(r.err == 1.0);
    CHECK(r.argmax == 0);
    CHECK_THROWS_AS(parallel::sup_error(sn, 1.0, probe_grid::unit(2, 3), [](const double*, double* y) { y[0] = 0; }),
                    shape_error);
}
