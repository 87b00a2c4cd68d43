#include "ult/kernels.hpp"

#include "ult/errors.hpp"

#include <boost/random/sobol.hpp>

#include <algorithm>
#include <cmath>
#include <omp.h>

namespace ult {

probe_grid::probe_grid(std::vector<double> lo, std::vector<double> hi, long per_dim)
    : lo_(std::move(lo)), hi_(std::move(hi)), per_dim_(per_dim) {
    if (lo_.size() != hi_.size() || lo_.empty()) throw shape_error("grid bounds must have matching nonzero length");
    if (per_dim_ < 2) throw domain_error("grid needs at least 2 points per dimension");
    for (std::size_t i = 0; i < lo_.size(); ++i)
        if (!(hi_[i] >= lo_[i])) throw domain_error("grid bounds must satisfy lo <= hi");
    const int d = dim();
    if (d <= 2) {
        size_ = d == 1 ? per_dim_ : per_dim_ * per_dim_;
        return;
    }
    sobol_ = true;
    size_ = per_dim_;
    boost::random::sobol gen(static_cast<std::size_t>(d));
    sobol_pts_.resize(static_cast<std::size_t>(size_) * d);
    const double denom = static_cast<double>(gen.max()) + 1.0;
    for (auto& v : sobol_pts_) v = static_cast<double>(gen()) / denom;
}

probe_grid probe_grid::unit(int d, long per_dim) {
    return probe_grid(std::vector<double>(static_cast<std::size_t>(d), 0.0),
                      std::vector<double>(static_cast<std::size_t>(d), 1.0), per_dim);
}

void probe_grid::point(long i, double* x) const {
    const int d = dim();
    if (sobol_) {
        for (int k = 0; k < d; ++k) {
            const double u = sobol_pts_[static_cast<std::size_t>(i) * d + k];
            x[k] = lo_[static_cast<std::size_t>(k)] + u * (hi_[static_cast<std::size_t>(k)] - lo_[static_cast<std::size_t>(k)]);
        }
        return;
    }
    long rest = i;
    for (int k = 0; k < d; ++k) {
        const long j = rest % per_dim_;
        rest /= per_dim_;
        const auto u = static_cast<std::size_t>(k);
        x[k] = j == per_dim_ - 1 ? hi_[u]
                                 : lo_[u] + (hi_[u] - lo_[u]) * static_cast<double>(j) / static_cast<double>(per_dim_ - 1);
    }
}

namespace {

// Max with first-index tie-breaking so the parallel reduction matches the serial sweep.
void merge_sup(sup_result& into, const sup_result& other) {
    if (other.err > into.err || (other.err == into.err && other.argmax >= 0 &&
                                 (into.argmax < 0 || other.argmax < into.argmax)))
        into = other;
}

template <class Eval>
sup_result sweep_range(long begin, long end, int din, int dout, double scale, const probe_grid& grid,
                       const target_fn& target, Eval&& eval) {
    std::vector<double> x(static_cast<std::size_t>(din)), y(static_cast<std::size_t>(dout)),
        ref(static_cast<std::size_t>(dout));
    sup_result r;
    for (long i = begin; i < end; ++i) {
        grid.point(i, x.data());
        eval(x.data(), y.data());
        target(x.data(), ref.data());
        for (int k = 0; k < dout; ++k) {
            const double e = std::abs(scale * y[static_cast<std::size_t>(k)] - ref[static_cast<std::size_t>(k)]);
            if (r.argmax < 0 || e > r.err) r = {e, i};
        }
    }
    return r;
}

} // namespace

namespace serial {

sup_result sup_error(const sparse_net& net, double scale, const probe_grid& grid, const target_fn& target) {
    if (grid.dim() != net.input_dim()) throw shape_error("grid dimension does not match net input");
    std::vector<double> scratch;
    return sweep_range(0, grid.size(), net.input_dim(), net.output_dim(), scale, grid, target,
                       [&](const double* x, double* y) { net.eval(x, y, scratch); });
}

detail::subset_candidate best_k(std::span<const double> v, double z, int K) {
    return detail::best_k_scan(v, z, K, 0, static_cast<int>(v.size()), true);
}

long success_count(distribution d, int n, double m, double eps, int trials, solve_strategy strategy,
                   std::uint64_t seed, int max_subset) {
    long hits = 0;
    for (int t = 0; t < trials; ++t)
        if (trial_feasible(d, n, m, eps, strategy, seed, static_cast<std::uint64_t>(t), max_subset)) ++hits;
    return hits;
}

} // namespace serial

namespace parallel {

sup_result sup_error(const sparse_net& net, double scale, const probe_grid& grid, const target_fn& target) {
    if (grid.dim() != net.input_dim()) throw shape_error("grid dimension does not match net input");
    const int threads = omp_get_max_threads();
    std::vector<sup_result> part(static_cast<std::size_t>(threads));
    const long n = grid.size();
#pragma omp parallel num_threads(threads)
    {
        const int t = omp_get_thread_num();
        const int nt = omp_get_num_threads();
        const long begin = n * t / nt;
        const long end = n * (t + 1) / nt;
        std::vector<double> scratch;
        part[static_cast<std::size_t>(t)] =
            sweep_range(begin, end, net.input_dim(), net.output_dim(), scale, grid, target,
                        [&](const double* x, double* y) { net.eval(x, y, scratch); });
    }
    sup_result r;
    for (const auto& p : part) merge_sup(r, p);
    return r;
}

detail::subset_candidate best_k(std::span<const double> v, double z, int K) {
    const int n = static_cast<int>(v.size());
    detail::subset_candidate best{std::abs(z), {}};
    if (K <= 0 || n == 0) return best;
#pragma omp parallel
    {
        detail::subset_candidate local{std::numeric_limits<double>::infinity(), {}};
#pragma omp for schedule(dynamic, 1) nowait
        for (int i = 0; i < n; ++i) {
            auto c = detail::best_k_scan(v, z, K, i, i + 1, false);
            if (!c.idx.empty() && detail::candidate_less(c, local)) local = std::move(c);
        }
#pragma omp critical
        if (!local.idx.empty() && detail::candidate_less(local, best)) best = std::move(local);
    }
    return best;
}

long success_count(distribution d, int n, double m, double eps, int trials, solve_strategy strategy,
                   std::uint64_t seed, int max_subset) {
    long hits = 0;
#pragma omp parallel for reduction(+ : hits) schedule(dynamic, 4)
    for (int t = 0; t < trials; ++t)
        if (trial_feasible(d, n, m, eps, strategy, seed, static_cast<std::uint64_t>(t), max_subset)) ++hits;
    return hits;
}

} // namespace parallel

sup_result sup_error_dense(const mother_net& net, const prune_mask& mask, double scale, const probe_grid& grid,
                           const target_fn& target) {
    if (grid.dim() != net.input_dim()) throw shape_error("grid dimension does not match net input");
    return sweep_range(0, grid.size(), net.input_dim(), net.output_dim(), scale, grid, target,
                       [&](const double* x, double* y) {
                           auto out = forward(net, &mask, std::span<const double>(x, static_cast<std::size_t>(net.input_dim())));
                           std::copy(out.begin(), out.end(), y);
                       });
}

bool trial_feasible(distribution d, int n, double m, double eps, solve_strategy strategy, std::uint64_t seed,
                    std::uint64_t trial, int max_subset) {
    const auto ground = trial_ground(d, n, seed, trial);
    const double z = trial_target(m, seed, trial);
    if (strategy == solve_strategy::exact) return min_subset_error(ground, z) <= eps;
    const int K = max_subset <= 0 ? static_cast<int>(ground.size()) : max_subset;
    return serial::best_k(ground, z, K).err <= eps;
}

} // namespace ult
