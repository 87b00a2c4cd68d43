#pragma once

#include "ult/rng.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace ult {

struct subset_sum_instance {
    std::vector<double> ground;
    double target = 0.0;
    double tolerance = 1e-3;
    int max_subset = 5; // 0 = unbounded
};

struct subset_sum_solution {
    std::vector<int> indices; // ascending
    double achieved = 0.0;
    bool feasible = false;
};

enum class solve_strategy { exact, best_k };
solve_strategy parse_strategy(const std::string& s);
std::string to_string(solve_strategy s);

constexpr int exact_capacity = 25;

// exact: global minimum over all 2^n subsets (n <= 25).
// best_k: minimum over subsets of size <= max_subset.
// Ties: smaller cardinality, then lexicographic index order.
subset_sum_solution solve(const subset_sum_instance& inst, solve_strategy strategy);

// |z - sum_{k in S} X_k| with the sum taken in ascending index order.
double subset_error(std::span<const double> ground, std::span<const int> indices, double z);

// Global minimum subset error by meet-in-the-middle (n <= 48). Used as a
// feasibility oracle in Monte Carlo sweeps where n exceeds exact_capacity.
double min_subset_error(std::span<const double> ground, double z);

int required_ground_size(double m, double h, double alpha, double B, double eps, double delta, double C);

// Extended corollary for mixed distributions: C h m / min alpha * log(B m / min(delta, eps)).
int required_ground_size_extended(double h, double m, double alpha_min, double B, double eps, double delta,
                                  double C);

// Named random variables used by the corollaries and lemmas.
enum class distribution { uniform, normal, uniform_product, normal_product };
distribution parse_distribution(const std::string& s);
std::string to_string(distribution d);
double draw(distribution d, rng_t& g);
// Value bound B used when discarding unbounded samples (normal families only).
double value_bound(distribution d);
bool is_bounded(distribution d);

struct containment_report {
    std::string sampler;
    double h = 0;
    double alpha_claim = 0;
    double empirical_alpha_lower_bound = 0;
    long trials = 0;
    bool pass = false;
};

containment_report contains_uniform_check(const std::string& sampler, double h, double alpha_claim, long trials,
                                          std::uint64_t seed = 0);

// Ground set for one Monte Carlo trial: the first n draws of the trial's own
// stream, with out-of-bound values dropped. Prefix-consistent in n.
std::vector<double> trial_ground(distribution d, int n, std::uint64_t seed, std::uint64_t trial);
double trial_target(double m, std::uint64_t seed, std::uint64_t trial);

double success_rate(distribution d, int n, double m, double eps, int trials, solve_strategy strategy,
                    std::uint64_t seed = 0, int max_subset = 5);

// Smallest n <= n_max whose trial ground set reaches the trial target within
// eps (exact feasibility), or n_max + 1 if none does.
int minimal_ground_size(distribution d, double m, double eps, std::uint64_t seed, std::uint64_t trial, int n_max);

} // namespace ult
