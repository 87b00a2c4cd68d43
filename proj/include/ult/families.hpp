#pragma once

#include "ult/net.hpp"
#include "ult/prune.hpp"
#include "ult/pwl.hpp"

#include <string>
#include <vector>

namespace ult {

// Basis prod_i (0.5 (1 + x_i))^{r_i} on [0,1]^d, one row of r per basis function.
struct poly_family_spec {
    int d = 1;
    std::vector<std::vector<double>> exponents; // k x d
    double eps = 0.1;
    double delta = 0.1;
    int m = 1;
    // Theorem mode requires nonnegative integer exponents; the reproduction accepts reals.
    bool integer_exponents = false;
    int N_log = 0; // 0 picks the theorem value
    int N_exp = 0;

    int k() const { return static_cast<int>(exponents.size()); }
    double t() const; // max row sum, at least 1
    double q() const; // max entry
    void validate() const;
};

// Basis sin(2 pi (n . x + c)) on [0,1]^d.
struct fourier_family_spec {
    int d = 1;
    std::vector<std::vector<int>> freqs; // k x d, entries >= 0
    std::vector<double> phases;          // k, in [0,1]
    double eps = 0.1;
    double delta = 0.1;
    int m = 1;
    int N_sin = 0; // knots per unit length, 0 picks the theorem value

    int k() const { return static_cast<int>(freqs.size()); }
    int M() const; // max frequency
    void validate() const;
};

struct stage_sheet {
    std::string name;
    double eps = 0.0;
    double delta = 0.0;
    int N = 0;
    double M = 0.0;
    double Q = 0.0;
};

// Target network: univariate stages are pwl reps, the linear stage is an affine map.
// For the polynomial family the log stage carries u(x) = -log((1+x)/2) >= 0 and the
// exp stage g(y) = exp(-y), so the composition is nonnegative at every hidden layer.
struct family_target {
    std::string family; // poly | fourier
    int d = 1;
    int k = 1;
    double eps = 0.0;
    double delta = 0.0;
    int m = 1;

    bool has_inner = false; // univariate stage before the linear stage (poly)
    pwl_rep inner;
    double inner_lo = 0.0, inner_hi = 1.0;

    bool has_linear = false;
    linear_target linear;   // k x d

    pwl_rep outer;
    double outer_lo = 0.0, outer_hi = 1.0;
    double outer_shift = 0.0; // basis = outer target - shift (Fourier: +1 keeps the target positive)

    std::vector<stage_sheet> sheet;

    // Composite target network f_N and the true basis (shifted by outer_shift), k outputs each.
    void eval_network(const double* x, double* y) const;
    void eval_basis(const double* x, double* y) const;
};

family_target build_poly_target(const poly_family_spec& spec);
family_target build_fourier_target(const fourier_family_spec& spec);

struct family_report {
    ticket_report ticket;           // sup_error is measured against the target network
    double basis_error = 0.0;       // sup |lambda f_eps - b| with b shifted as the target
    double approximation_error = 0.0; // sup |f_N - b|
    double pruning_budget = 0.0;    // eps / (2 k m)
};

// Stage layout is read from the layer kinds: poly is shared+ dense+ shared+,
// Fourier is dense* shared+ (no dense stage only for the identity map x -> x).
family_report prune_family(const family_target& target, const mother_net& mother, long grid_per_dim,
                           const prune_options& opt = {});

} // namespace ult
