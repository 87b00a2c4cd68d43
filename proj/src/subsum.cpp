#include "ult/subsum.hpp"

#include "ult/errors.hpp"
#include "ult/kernels.hpp"
#include "ult/subsum_detail.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

namespace ult {

solve_strategy parse_strategy(const std::string& s) {
    if (s == "exact") return solve_strategy::exact;
    if (s == "best_k") return solve_strategy::best_k;
    throw domain_error("unknown subset-sum strategy '" + s + "'");
}

std::string to_string(solve_strategy s) { return s == solve_strategy::exact ? "exact" : "best_k"; }

namespace detail {

bool candidate_less(const subset_candidate& a, const subset_candidate& b) {
    if (a.err != b.err) return a.err < b.err;
    if (a.idx.size() != b.idx.size()) return a.idx.size() < b.idx.size();
    return std::lexicographical_compare(a.idx.begin(), a.idx.end(), b.idx.begin(), b.idx.end());
}

namespace {

struct scan_state {
    const double* v;
    int n;
    double z;
    int K;
    std::vector<int> cur;
    subset_candidate best;
};

void dfs(scan_state& st, int start, double sum) {
    const int size = static_cast<int>(st.cur.size()) + 1;
    for (int i = start; i < st.n; ++i) {
        const double s = sum + st.v[i];
        const double err = std::abs(st.z - s);
        st.cur.push_back(i);
        if (err < st.best.err || (err == st.best.err && size < static_cast<int>(st.best.idx.size())))
            st.best = {err, st.cur};
        if (size < st.K) dfs(st, i + 1, s);
        st.cur.pop_back();
    }
}

} // namespace

subset_candidate best_k_scan(std::span<const double> v, double z, int K, int first_lo, int first_hi,
                             bool include_empty) {
    scan_state st{v.data(), static_cast<int>(v.size()), z, K, {}, {}};
    st.best.err = include_empty ? std::abs(z) : std::numeric_limits<double>::infinity();
    if (K <= 0) return st.best;
    for (int i = first_lo; i < first_hi; ++i) {
        const double s = v[static_cast<std::size_t>(i)];
        const double err = std::abs(z - s);
        st.cur.assign(1, i);
        if (err < st.best.err || (err == st.best.err && 1 < static_cast<int>(st.best.idx.size())))
            st.best = {err, st.cur};
        if (K > 1) dfs(st, i + 1, s);
    }
    return st.best;
}

} // namespace detail

double subset_error(std::span<const double> ground, std::span<const int> indices, double z) {
    double s = 0.0;
    for (int i : indices) s += ground[static_cast<std::size_t>(i)];
    return std::abs(z - s);
}

namespace {

subset_sum_solution solve_exact(const subset_sum_instance& inst) {
    const int n = static_cast<int>(inst.ground.size());
    if (n > exact_capacity)
        throw capacity_error("exact subset-sum limited to n <= " + std::to_string(exact_capacity) + ", got " +
                             std::to_string(n));
    const double z = inst.target;
    detail::subset_candidate best{std::abs(z), {}};
    std::vector<int> idx;
    const std::uint32_t total = 1u << n;
    double running = 0.0;
    std::uint32_t gray = 0;
    for (std::uint32_t i = 1; i < total; ++i) {
        const int bit = std::countr_zero(i);
        gray ^= 1u << bit;
        running += (gray >> bit & 1u) ? inst.ground[static_cast<std::size_t>(bit)]
                                      : -inst.ground[static_cast<std::size_t>(bit)];
        // The running sum drifts by rounding; only near-best masks are rescored exactly.
        if (std::abs(z - running) > best.err + 1e-9) continue;
        idx.clear();
        for (int k = 0; k < n; ++k)
            if (gray >> k & 1u) idx.push_back(k);
        detail::subset_candidate c{subset_error(inst.ground, idx, z), idx};
        if (detail::candidate_less(c, best)) best = std::move(c);
    }
    return {best.idx, best.err, best.err <= inst.tolerance};
}

} // namespace

subset_sum_solution solve(const subset_sum_instance& inst, solve_strategy strategy) {
    if (!(inst.tolerance > 0.0)) throw domain_error("subset-sum tolerance must be positive");
    if (strategy == solve_strategy::exact) return solve_exact(inst);
    const int n = static_cast<int>(inst.ground.size());
    const int K = inst.max_subset <= 0 ? n : std::min(inst.max_subset, n);
    auto best = detail::best_k_scan(inst.ground, inst.target, K, 0, n, true);
    return {best.idx, best.err, best.err <= inst.tolerance};
}

namespace {

// All 2^n subset sums of v in ascending order, built by repeated merging.
std::vector<double> sorted_subset_sums(std::span<const double> v) {
    std::vector<double> sums{0.0}, shifted, merged;
    for (double x : v) {
        shifted.resize(sums.size());
        for (std::size_t i = 0; i < sums.size(); ++i) shifted[i] = sums[i] + x;
        merged.resize(sums.size() * 2);
        std::merge(sums.begin(), sums.end(), shifted.begin(), shifted.end(), merged.begin());
        sums.swap(merged);
    }
    return sums;
}

} // namespace

double min_subset_error(std::span<const double> ground, double z) {
    const std::size_t n = ground.size();
    if (n > 48) throw capacity_error("meet-in-the-middle limited to n <= 48");
    const std::size_t a = n / 2;
    auto left = sorted_subset_sums(ground.subspan(0, a));
    auto right = sorted_subset_sums(ground.subspan(a));
    double best = std::abs(z);
    // left ascending, right descending: two-pointer sweep towards z.
    std::size_t i = 0;
    std::size_t j = right.size();
    while (i < left.size() && j > 0) {
        const double s = left[i] + right[j - 1];
        best = std::min(best, std::abs(z - s));
        if (s > z)
            --j;
        else if (s < z)
            ++i;
        else
            return 0.0;
    }
    return best;
}

int required_ground_size(double m, double h, double alpha, double B, double eps, double delta, double C) {
    if (!(m > 0 && h > 0 && alpha > 0 && B > 0 && C > 0)) throw domain_error("required_ground_size needs positive arguments");
    if (!(eps > 0 && eps < 1 && delta > 0 && delta < 1)) throw domain_error("eps and delta must lie in (0,1)");
    const double r = std::max(1.0, m / h);
    const double inner = std::min(delta / r, eps / std::max(m, h));
    const double n = C * r / alpha * std::log(B / inner);
    return std::max(0, static_cast<int>(std::ceil(n - 1e-9)));
}

int required_ground_size_extended(double h, double m, double alpha_min, double B, double eps, double delta,
                                  double C) {
    if (!(m > 0 && h > 0 && alpha_min > 0 && B > 0 && C > 0))
        throw domain_error("required_ground_size_extended needs positive arguments");
    if (!(eps > 0 && eps < 1 && delta > 0 && delta < 1)) throw domain_error("eps and delta must lie in (0,1)");
    const double n = C * h * m / alpha_min * std::log(B * m / std::min(delta, eps));
    return std::max(0, static_cast<int>(std::ceil(n - 1e-9)));
}

distribution parse_distribution(const std::string& s) {
    if (s == "uniform") return distribution::uniform;
    if (s == "normal") return distribution::normal;
    if (s == "uniform_product") return distribution::uniform_product;
    if (s == "normal_product") return distribution::normal_product;
    throw domain_error("unknown sampler '" + s + "'");
}

std::string to_string(distribution d) {
    switch (d) {
    case distribution::uniform: return "uniform";
    case distribution::normal: return "normal";
    case distribution::uniform_product: return "uniform_product";
    case distribution::normal_product: return "normal_product";
    }
    return "?";
}

double draw(distribution d, rng_t& g) {
    switch (d) {
    case distribution::uniform: return std::uniform_real_distribution<double>(-1.0, 1.0)(g);
    case distribution::normal: return std::normal_distribution<double>(0.0, 1.0)(g);
    case distribution::uniform_product: {
        const double v1 = std::uniform_real_distribution<double>(0.0, 1.0)(g);
        const double v2 = std::uniform_real_distribution<double>(-2.0, 2.0)(g);
        return v2 * v1;
    }
    case distribution::normal_product: {
        const double v1 = std::abs(std::normal_distribution<double>(0.0, 1.0)(g));
        const double v2 = std::normal_distribution<double>(0.0, 2.0)(g);
        return v2 * v1;
    }
    }
    return 0.0;
}

double value_bound(distribution d) { return d == distribution::uniform ? 1.0 : 2.0; }

bool is_bounded(distribution d) { return d == distribution::uniform || d == distribution::uniform_product; }

containment_report contains_uniform_check(const std::string& sampler, double h, double alpha_claim, long trials,
                                          std::uint64_t seed) {
    const auto d = parse_distribution(sampler);
    if (trials < 100000) throw domain_error("contains_uniform_check needs at least 1e5 trials");
    if (!(h > 0)) throw domain_error("contains_uniform_check needs h > 0");
    constexpr int bins = 20;
    std::vector<long> counts(bins, 0);
    auto g = make_stream(seed, {fnv1a("contains_uniform"), fnv1a(sampler)});
    const double width = 2.0 * h / bins;
    for (long t = 0; t < trials; ++t) {
        const double x = draw(d, g);
        if (x < -h || x >= h) continue;
        const int b = std::min(bins - 1, static_cast<int>((x + h) / width));
        ++counts[static_cast<std::size_t>(b)];
    }
    const long floor_count = *std::min_element(counts.begin(), counts.end());
    const double floor_density = static_cast<double>(floor_count) / (static_cast<double>(trials) * width);
    containment_report r;
    r.sampler = sampler;
    r.h = h;
    r.alpha_claim = alpha_claim;
    r.trials = trials;
    r.empirical_alpha_lower_bound = floor_density * 2.0 * h;
    r.pass = r.empirical_alpha_lower_bound >= alpha_claim - 0.02;
    return r;
}

namespace {
const std::uint64_t ground_tag = fnv1a("subsum.ground");
const std::uint64_t target_tag = fnv1a("subsum.target");
} // namespace

std::vector<double> trial_ground(distribution d, int n, std::uint64_t seed, std::uint64_t trial) {
    auto g = make_stream(seed, {ground_tag, trial});
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(std::max(n, 0)));
    const double B = value_bound(d);
    const bool bounded = is_bounded(d);
    for (int i = 0; i < n; ++i) {
        const double x = draw(d, g);
        if (!bounded && std::abs(x) > B) continue;
        out.push_back(x);
    }
    return out;
}

double trial_target(double m, std::uint64_t seed, std::uint64_t trial) {
    auto g = make_stream(seed, {target_tag, trial});
    return std::uniform_real_distribution<double>(-m, m)(g);
}

double success_rate(distribution d, int n, double m, double eps, int trials, solve_strategy strategy,
                    std::uint64_t seed, int max_subset) {
    if (trials < 1) throw domain_error("success_rate needs trials >= 1");
    const long hits = parallel::success_count(d, n, m, eps, trials, strategy, seed, max_subset);
    return static_cast<double>(hits) / trials;
}

int minimal_ground_size(distribution d, double m, double eps, std::uint64_t seed, std::uint64_t trial, int n_max) {
    const auto ground_all = trial_ground(d, n_max, seed, trial);
    const double z = trial_target(m, seed, trial);
    // Map "first n draws" to the surviving prefix after truncation.
    auto g = make_stream(seed, {ground_tag, trial});
    const double B = value_bound(d);
    const bool bounded = is_bounded(d);
    std::size_t kept = 0;
    if (std::abs(z) <= eps) return 0;
    for (int n = 1; n <= n_max; ++n) {
        const double x = draw(d, g);
        if (!bounded && std::abs(x) > B) continue;
        ++kept;
        if (min_subset_error(std::span<const double>(ground_all.data(), kept), z) <= eps) return n;
    }
    return n_max + 1;
}

} // namespace ult
