#pragma once

#include "ult/net.hpp"
#include "ult/subsum.hpp"
#include "ult/subsum_detail.hpp"

#include <functional>
#include <span>
#include <vector>

namespace ult {

// Probe set over a box. Tensor grid with `per_dim` nodes per axis for d <= 2,
// otherwise `per_dim` Sobol points.
class probe_grid {
public:
    probe_grid(std::vector<double> lo, std::vector<double> hi, long per_dim);
    static probe_grid unit(int d, long per_dim);

    int dim() const { return static_cast<int>(lo_.size()); }
    long size() const { return size_; }
    long per_dim() const { return per_dim_; }
    bool sobol() const { return sobol_; }
    void point(long i, double* x) const;
    const std::vector<double>& lo() const { return lo_; }
    const std::vector<double>& hi() const { return hi_; }

private:
    std::vector<double> lo_, hi_;
    long per_dim_ = 0;
    long size_ = 0;
    bool sobol_ = false;
    std::vector<double> sobol_pts_;
};

// Fills y (length = net output dim) with the reference values at x.
using target_fn = std::function<void(const double* x, double* y)>;

struct sup_result {
    double err = 0.0;
    long argmax = -1;
};

namespace serial {

sup_result sup_error(const sparse_net& net, double scale, const probe_grid& grid, const target_fn& target);
detail::subset_candidate best_k(std::span<const double> v, double z, int K);
long success_count(distribution d, int n, double m, double eps, int trials, solve_strategy strategy,
                   std::uint64_t seed, int max_subset);

} // namespace serial

namespace parallel {

sup_result sup_error(const sparse_net& net, double scale, const probe_grid& grid, const target_fn& target);
detail::subset_candidate best_k(std::span<const double> v, double z, int K);
long success_count(distribution d, int n, double m, double eps, int trials, solve_strategy strategy,
                   std::uint64_t seed, int max_subset);

} // namespace parallel

// Dense-forward version of sup_error, used to recompute reported errors from scratch.
sup_result sup_error_dense(const mother_net& net, const prune_mask& mask, double scale, const probe_grid& grid,
                           const target_fn& target);

bool trial_feasible(distribution d, int n, double m, double eps, solve_strategy strategy, std::uint64_t seed,
                    std::uint64_t trial, int max_subset);

} // namespace ult
