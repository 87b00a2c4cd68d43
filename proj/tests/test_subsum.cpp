#include "ult/errors.hpp"
#include "ult/kernels.hpp"
#include "ult/subsum.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace ult;

namespace {

// Plain enumeration over all masks with subset size <= K, same tie rules.
subset_sum_solution brute(const std::vector<double>& v, double z, int K, double tol) {
    const int n = static_cast<int>(v.size());
    double best = std::abs(z);
    std::vector<int> best_idx;
    for (unsigned mask = 1; mask < (1u << n); ++mask) {
        std::vector<int> idx;
        for (int i = 0; i < n; ++i)
            if (mask >> i & 1u) idx.push_back(i);
        if (static_cast<int>(idx.size()) > K) continue;
        double s = 0.0;
        for (int i : idx) s += v[static_cast<std::size_t>(i)];
        const double e = std::abs(z - s);
        const bool better = e < best || (e == best && (idx.size() < best_idx.size() ||
                                                       (idx.size() == best_idx.size() && idx < best_idx)));
        if (better) {
            best = e;
            best_idx = idx;
        }
    }
    return {best_idx, best, best <= tol};
}

std::vector<double> uniform_ground(int n, std::mt19937_64& g) {
    std::uniform_real_distribution<double> u(-1, 1);
    std::vector<double> v(static_cast<std::size_t>(n));
    for (auto& x : v) x = u(g);
    return v;
}

} // namespace

TEST_CASE("hand examples") {
    subset_sum_instance inst{{1.0, 2.0, 4.0}, 3.0, 1e-9, 0};
    auto s = solve(inst, solve_strategy::exact);
    CHECK(s.indices == std::vector<int>{0, 1});
    CHECK(s.achieved == 0.0);
    CHECK(s.feasible);

    inst = {{1.0, 1.0}, 1.0, 1e-9, 0};
    CHECK(solve(inst, solve_strategy::exact).indices == std::vector<int>{0});
    CHECK(solve(inst, solve_strategy::best_k).indices == std::vector<int>{0});

    inst = {{0.5, 0.25}, 0.1, 1e-3, 5};
    s = solve(inst, solve_strategy::exact);
    CHECK(s.indices.empty());
    CHECK(s.achieved == doctest::Approx(0.1));
    CHECK_FALSE(s.feasible);
}

TEST_CASE("solvers match brute force") {
    std::mt19937_64 g(17);
    std::uniform_real_distribution<double> zt(-1, 1);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 1 + trial % 12;
        const auto v = uniform_ground(n, g);
        const double z = zt(g);
        const auto ex = solve({v, z, 0.01, 0}, solve_strategy::exact);
        const auto bf = brute(v, z, n, 0.01);
        CHECK(ex.achieved == bf.achieved);
        CHECK(ex.indices == bf.indices);
        CHECK(ex.feasible == bf.feasible);

        const int K = 1 + trial % 4;
        const auto bk = solve({v, z, 0.01, K}, solve_strategy::best_k);
        const auto bfk = brute(v, z, K, 0.01);
        CHECK(bk.achieved == bfk.achieved);
        CHECK(bk.indices == bfk.indices);
        CHECK(static_cast<int>(bk.indices.size()) <= K);

        CHECK(std::abs(min_subset_error(v, z) - bf.achieved) <= 1e-12);
    }
}

TEST_CASE("achieved error is recomputed in index order") {
    std::mt19937_64 g(3);
    for (int t = 0; t < 50; ++t) {
        const auto v = uniform_ground(10, g);
        const auto s = solve({v, 0.3, 0.01, 4}, solve_strategy::best_k);
        CHECK(s.achieved == subset_error(v, s.indices, 0.3));
        CHECK(std::is_sorted(s.indices.begin(), s.indices.end()));
    }
}

TEST_CASE("serial and parallel best_k agree") {
    std::mt19937_64 g(8);
    for (int t = 0; t < 30; ++t) {
        const auto v = uniform_ground(20 + t, g);
        const auto a = serial::best_k(v, 0.37, 4);
        const auto b = parallel::best_k(v, 0.37, 4);
        CHECK(a.err == b.err);
        CHECK(a.idx == b.idx);
    }
}

TEST_CASE("capacity and argument errors") {
    std::vector<double> big(26, 0.1);
    CHECK_THROWS_AS(solve({big, 0.5, 0.01, 0}, solve_strategy::exact), capacity_error);
    CHECK_THROWS_AS(solve({big, 0.5, 0.0, 0}, solve_strategy::best_k), domain_error);
    std::vector<double> huge(49, 0.1);
    CHECK_THROWS_AS(min_subset_error(huge, 0.5), capacity_error);
    CHECK_THROWS_AS(parse_strategy("greedy"), domain_error);
    CHECK_THROWS_AS(parse_distribution("cauchy"), domain_error);
}

TEST_CASE("required ground size") {
    // C r / alpha * log(B / min(delta / r, eps / max(m, h))), r = max(1, m / h).
    CHECK(required_ground_size(1, 1, 1, 1, 0.01, 0.01, 1) == 5);            // log 100 = 4.605
    CHECK(required_ground_size(2, 1, 0.5, 2, 0.01, 0.1, 1) == 24);          // 4 log(2 / 0.005) = 23.97
    CHECK(required_ground_size(0.5, 1, 1, 1, 0.1, 0.05, 3) == 9);           // 3 log 20 = 8.99
    CHECK(required_ground_size_extended(1, 2, 0.25, 2, 0.01, 0.05, 1) == 48); // 8 log 400 = 47.93
    CHECK_THROWS_AS(required_ground_size(1, 1, 1, 1, 1.5, 0.1, 1), domain_error);
    CHECK_THROWS_AS(required_ground_size(1, 1, 0, 1, 0.1, 0.1, 1), domain_error);
}

TEST_CASE("property: required ground size is monotone") {
    int prev = 0;
    for (double eps = 0.5; eps > 1e-4; eps /= 1.5) {
        const int n = required_ground_size(1, 1, 1, 1, eps, 0.01, 2);
        CHECK(n >= prev);
        prev = n;
    }
    prev = 0;
    for (double delta = 0.9; delta > 1e-6; delta /= 2) {
        const int n = required_ground_size(1, 1, 1, 1, 0.001, delta, 2);
        CHECK(n >= prev);
        prev = n;
    }
}

TEST_CASE("containment of the uniform law") {
    // alpha = 1 is the boundary case; the histogram floor needs more samples.
    CHECK(contains_uniform_check("uniform", 1.0, 1.0, 1000000).pass);
    CHECK(contains_uniform_check("normal", 1.0, 0.4, 200000).pass);
    CHECK(contains_uniform_check("uniform_product", 1.0, std::log(4.0) / 4.0, 200000).pass);
    CHECK(contains_uniform_check("normal_product", 1.0, 0.2, 200000).pass);
    // A claim above the true floor must fail: U[-1,1] contains at most alpha = 1.
    CHECK_FALSE(contains_uniform_check("normal", 1.0, 0.6, 200000).pass);
    CHECK_THROWS_AS(contains_uniform_check("uniform", 1.0, 1.0, 10), domain_error);
}

TEST_CASE("trial ground sets are prefix consistent and bounded") {
    for (auto d : {distribution::uniform, distribution::normal, distribution::uniform_product,
                   distribution::normal_product}) {
        const auto a = trial_ground(d, 40, 9, 3);
        const auto b = trial_ground(d, 20, 9, 3);
        REQUIRE(b.size() <= a.size());
        for (std::size_t i = 0; i < b.size(); ++i) CHECK(a[i] == b[i]);
        for (double x : a) CHECK(std::abs(x) <= value_bound(d));
        CHECK(trial_ground(d, 40, 10, 3) != a);
    }
}

TEST_CASE("property: per-trial feasibility is monotone in n") {
    for (std::uint64_t trial = 0; trial < 40; ++trial) {
        bool was = false;
        for (int n = 2; n <= 24; n += 2) {
            const bool f = trial_feasible(distribution::uniform, n, 1.0, 0.01, solve_strategy::exact, 4, trial, 0);
            if (was) CHECK(f);
            was = f;
        }
        const int nstar = minimal_ground_size(distribution::uniform, 1.0, 0.01, 4, trial, 40);
        if (nstar <= 24 && nstar > 0) {
            CHECK(trial_feasible(distribution::uniform, nstar, 1.0, 0.01, solve_strategy::exact, 4, trial, 0));
            if (nstar > 1)
                CHECK_FALSE(
                    trial_feasible(distribution::uniform, nstar - 1, 1.0, 0.01, solve_strategy::exact, 4, trial, 0));
        }
    }
}

TEST_CASE("serial and parallel success counts agree") {
    for (auto strat : {solve_strategy::exact, solve_strategy::best_k}) {
        const long a = serial::success_count(distribution::uniform_product, 16, 1.0, 0.01, 60, strat, 2, 5);
        const long b = parallel::success_count(distribution::uniform_product, 16, 1.0, 0.01, 60, strat, 2, 5);
        CHECK(a == b);
    }
    CHECK(success_rate(distribution::uniform, 24, 1.0, 0.01, 50, solve_strategy::exact, 1) > 0.9);
}
