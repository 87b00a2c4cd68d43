#include "ult/pwl.hpp"

#include "ult/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace ult {

void pwl_rep::validate() const {
    if (knots.empty()) throw domain_error("pwl rep needs at least one knot");
    if (coeffs.size() != knots.size() + 1) throw shape_error("pwl rep needs N+1 coefficients for N knots");
    for (std::size_t i = 1; i < knots.size(); ++i)
        if (!(knots[i] > knots[i - 1])) throw domain_error("pwl knots must be strictly increasing");
}

double pwl_rep::operator()(double x) const { return eval(*this, x); }

double eval(const pwl_rep& rep, double x) {
    double acc = 0.0;
    const std::size_t n = rep.knots.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double d = x - rep.knots[i];
        if (d > 0.0) acc += rep.coeffs[i] * d;
    }
    return acc + rep.coeffs[n];
}

pwl_rep from_samples(const std::function<double(double)>& f, double s0, double s_last, int N, pwl_extension ext) {
    if (N < 2) throw domain_error("from_samples needs N >= 2");
    if (!(s_last > s0)) throw domain_error("from_samples needs s_last > s0");
    const double delta = (s_last - s0) / (N - 1);
    pwl_rep rep;
    rep.knots.resize(static_cast<std::size_t>(N));
    std::vector<double> y(static_cast<std::size_t>(N));
    for (int i = 0; i < N; ++i) {
        rep.knots[static_cast<std::size_t>(i)] = i == N - 1 ? s_last : s0 + i * delta;
        y[static_cast<std::size_t>(i)] = f(rep.knots[static_cast<std::size_t>(i)]);
    }
    std::vector<double> m(static_cast<std::size_t>(N));
    for (int i = 0; i + 1 < N; ++i) {
        const auto u = static_cast<std::size_t>(i);
        m[u] = (y[u + 1] - y[u]) / (rep.knots[u + 1] - rep.knots[u]);
    }
    m[static_cast<std::size_t>(N - 1)] = ext == pwl_extension::flat ? 0.0 : m[static_cast<std::size_t>(N - 2)];
    rep.coeffs.resize(static_cast<std::size_t>(N) + 1);
    rep.coeffs[0] = m[0];
    for (int i = 1; i < N; ++i)
        rep.coeffs[static_cast<std::size_t>(i)] = m[static_cast<std::size_t>(i)] - m[static_cast<std::size_t>(i - 1)];
    rep.coeffs[static_cast<std::size_t>(N)] = y[0];
    return rep;
}

pwl_family parse_pwl_family(const std::string& s) {
    if (s == "log") return pwl_family::log;
    if (s == "exp") return pwl_family::exp;
    if (s == "sin") return pwl_family::sin;
    throw domain_error("unknown pwl family '" + s + "'");
}

int choose_N(pwl_family family, double eps, double t, double k, double m) {
    if (!(eps > 0.0 && eps < 1.0 + 1e-15)) throw domain_error("choose_N needs eps in (0,1]");
    switch (family) {
    case pwl_family::log:
        return 1 + static_cast<int>(std::ceil(std::sqrt(t * k * m / eps) - 1e-12));
    case pwl_family::exp:
        return 1 + static_cast<int>(std::ceil(t * std::sqrt(k * m / (4.0 * eps)) - 1e-12));
    case pwl_family::sin:
        return 1 + static_cast<int>(std::ceil(std::numbers::pi / std::asin(eps / 2.0)));
    }
    return 0;
}

double sin_error_bound(int N, double domain_length) {
    if (N < 2) throw domain_error("sin_error_bound needs N >= 2");
    const double delta = domain_length / (N - 1);
    if (delta > 0.5) throw domain_error("sin bound invalid for knot spacing above 1/2");
    return 4.0 * std::sin(std::numbers::pi * delta);
}

double log_error_bound(double delta) { return delta * delta / 4.0; }
double exp_error_bound(double delta) { return delta * delta / 8.0; }

error_budget_t error_budget(const pwl_rep& rep, double eps) {
    rep.validate();
    if (!(eps > 0.0)) throw domain_error("error_budget needs eps > 0");
    const double N = rep.N();
    double scale = std::max(std::abs(rep.knots.front()), std::abs(rep.knots.back()));
    error_budget_t out;
    if (scale < 1.0) {
        scale = 1.0;
        out.scale_floor_applied = true;
    }
    double sum_s = 0.0, sum_a = 0.0;
    for (double s : rep.knots) sum_s += std::abs(s);
    for (double a : rep.coeffs) sum_a += std::abs(a);
    out.eps_a = eps / (2.0 * ((N + 1.0) * scale + sum_s));
    out.eps_s = eps / (2.0 * (N + sum_a));
    return out;
}

double log_target(double x) { return std::log((1.0 + x) / 2.0); }

double exp_clamped(double y, double t) {
    const double lo = -t * std::numbers::ln2;
    if (y < lo) return std::exp(lo);
    if (y > 0.0) return 1.0;
    return std::exp(y);
}

double sin_target(double x) { return std::sin(2.0 * std::numbers::pi * x); }

double sup_grid_error(const std::function<double(double)>& f, const std::function<double(double)>& g,
                      double lo, double hi, long points) {
    if (points < 2) throw domain_error("grid needs at least 2 points");
    double worst = 0.0;
    for (long i = 0; i < points; ++i) {
        const double x = i == points - 1 ? hi : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
        worst = std::max(worst, std::abs(f(x) - g(x)));
    }
    return worst;
}

} // namespace ult
