#include "ult/errors.hpp"
#include "ult/pwl.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace ult;

namespace {

// Direct linear interpolation between neighbouring samples.
double interp_oracle(const std::function<double(double)>& f, double s0, double s1, int N, double x) {
    const double d = (s1 - s0) / (N - 1);
    int i = static_cast<int>(std::floor((x - s0) / d));
    i = std::clamp(i, 0, N - 2);
    const double a = s0 + i * d, b = i == N - 2 ? s1 : s0 + (i + 1) * d;
    const double t = (x - a) / (b - a);
    return (1 - t) * f(a) + t * f(b);
}

} // namespace

TEST_CASE("single relu") {
    const pwl_rep r{{0.0}, {1.0, 0.0}};
    CHECK(r(-1.0) == 0.0);
    CHECK(r(2.0) == 2.0);
    const pwl_rep c{{0.5}, {0.0, 3.0}};
    CHECK(c(10.0) == 3.0);
}

TEST_CASE("validation") {
    CHECK_THROWS_AS((pwl_rep{{}, {1.0}}).validate(), domain_error);
    CHECK_THROWS_AS((pwl_rep{{0.0, 1.0}, {1.0}}).validate(), shape_error);
    CHECK_THROWS_AS((pwl_rep{{1.0, 0.0}, {1.0, 1.0, 0.0}}).validate(), domain_error);
    CHECK_THROWS_AS(from_samples(sin_target, 0, 1, 1), domain_error);
    CHECK_THROWS_AS(parse_pwl_family("tan"), domain_error);
}

TEST_CASE("interpolation matches a direct oracle") {
    const std::function<double(double)> f = [](double x) { return std::cos(3 * x) + x * x; };
    std::mt19937_64 g(4);
    for (int N : {2, 3, 7, 40}) {
        const auto rep = from_samples(f, -1.0, 2.0, N);
        std::uniform_real_distribution<double> u(-1.0, 2.0);
        for (int k = 0; k < N; ++k) CHECK(rep(rep.knots[static_cast<std::size_t>(k)]) == doctest::Approx(f(rep.knots[static_cast<std::size_t>(k)])).epsilon(1e-12));
        for (int p = 0; p < 200; ++p) {
            const double x = u(g);
            CHECK(rep(x) == doctest::Approx(interp_oracle(f, -1.0, 2.0, N, x)).epsilon(1e-10));
        }
        // Flat to the right, constant to the left.
        CHECK(rep(5.0) == doctest::Approx(f(2.0)).epsilon(1e-12));
        CHECK(rep(-3.0) == doctest::Approx(f(-1.0)).epsilon(1e-12));
    }
    const auto lin = from_samples(f, 0.0, 1.0, 5, pwl_extension::linear);
    CHECK(lin(2.0) - lin(1.0) == doctest::Approx((f(1.0) - f(0.75)) / 0.25).epsilon(1e-10));
}

TEST_CASE("property: interpolation error bounds hold") {
    for (int N = 2; N <= 60; ++N) {
        const auto lg = from_samples(log_target, 0.0, 1.0, N);
        const double dl = 1.0 / (N - 1);
        CHECK(sup_grid_error(log_target, lg, 0.0, 1.0, 4001) <= log_error_bound(dl) + 1e-15);

        const double t = 3.0;
        const double lo = -t * std::numbers::ln2;
        const std::function<double(double)> ex = [t](double y) { return exp_clamped(y, t); };
        const auto er = from_samples(ex, lo, 0.0, N);
        CHECK(sup_grid_error(ex, er, lo, 0.0, 4001) <= exp_error_bound(-lo / (N - 1)) + 1e-15);

        if (N >= 3) {
            const auto sr = from_samples(sin_target, 0.0, 1.0, N);
            CHECK(sup_grid_error(sin_target, sr, 0.0, 1.0, 4001) <= sin_error_bound(N, 1.0) + 1e-15);
        }
    }
    CHECK_THROWS_AS(sin_error_bound(2, 1.0), domain_error);
}

TEST_CASE("knot counts") {
    CHECK(choose_N(pwl_family::log, 0.01) == 11);              // 1 + ceil(sqrt(100))
    CHECK(choose_N(pwl_family::log, 0.01, 2, 5, 1) == 33);     // 1 + ceil(sqrt(1000)) = 1 + 32
    CHECK(choose_N(pwl_family::exp, 0.01, 2) == 11);           // 1 + ceil(2 * 5)
    CHECK(choose_N(pwl_family::sin, 0.1) == 64);               // 1 + ceil(pi / asin(0.05)) = 1 + 63
    CHECK_THROWS_AS(choose_N(pwl_family::sin, 0.0), domain_error);
    for (double eps : {0.2, 0.05, 0.01, 0.001}) {
        const int N = choose_N(pwl_family::sin, eps);
        const auto sr = from_samples(sin_target, 0.0, 1.0, N);
        CHECK(sup_grid_error(sin_target, sr, 0.0, 1.0, 20001) <= eps);
    }
}

TEST_CASE("error budget hand example") {
    const pwl_rep r{{0.0, 0.5}, {1.0, -1.0, 0.2}};
    const auto b = error_budget(r, 1.0);
    CHECK(b.scale_floor_applied);
    CHECK(b.eps_a == doctest::Approx(1.0 / 7.0));
    CHECK(b.eps_s == doctest::Approx(1.0 / 8.4));
    const pwl_rep wide{{-3.0, 2.0}, {1.0, 1.0, 0.0}};
    CHECK_FALSE(error_budget(wide, 1.0).scale_floor_applied);
    CHECK(error_budget(wide, 1.0).eps_a == doctest::Approx(1.0 / (2.0 * (9.0 + 5.0))));
}

TEST_CASE("property: perturbations within the budget move f by at most eps") {
    std::mt19937_64 g(12);
    std::uniform_real_distribution<double> u(-1, 1);
    double worst_ratio = 0.0;
    for (int trial = 0; trial < 300; ++trial) {
        const int N = 2 + trial % 15;
        pwl_rep r;
        double s = -2.0 + u(g);
        for (int i = 0; i < N; ++i) {
            r.knots.push_back(s);
            s += 0.05 + std::abs(u(g));
        }
        for (int i = 0; i <= N; ++i) r.coeffs.push_back(3 * u(g));
        const double eps = 0.01 + 0.5 * std::abs(u(g));
        const auto b = error_budget(r, eps);
        pwl_rep q = r;
        for (auto& a : q.coeffs) a += b.eps_a * (u(g) > 0 ? 1 : -1);
        for (auto& k : q.knots) k += b.eps_s * u(g);
        std::sort(q.knots.begin(), q.knots.end());
        const double e = sup_grid_error(r, q, r.lo(), r.hi(), 2001);
        worst_ratio = std::max(worst_ratio, e / eps);
    }
    CHECK(worst_ratio <= 1.0);
}

TEST_CASE("targets") {
    CHECK(log_target(1.0) == 0.0);
    CHECK(log_target(0.0) == doctest::Approx(-std::numbers::ln2));
    CHECK(exp_clamped(1.0, 2.0) == 1.0);
    CHECK(exp_clamped(-10.0, 2.0) == doctest::Approx(0.25));
    CHECK(exp_clamped(-0.5, 2.0) == doctest::Approx(std::exp(-0.5)));
    CHECK(sin_target(0.25) == doctest::Approx(1.0));
}
