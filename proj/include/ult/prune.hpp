#pragma once

#include "ult/kernels.hpp"
#include "ult/net.hpp"
#include "ult/paths.hpp"
#include "ult/pwl.hpp"

#include <string>
#include <vector>

namespace ult {

struct prune_options {
    int ground_size = 30;      // elements offered to each subset-sum problem
    int min_ground_size = 5;   // below this a class counts as a width failure
    int max_subset = 5;        // best-k cap
    int path_budget = 160;     // candidates scanned per layer for paths and chains
    long grid_points = 10000;  // per input dimension
    // Ground neurons feeding a single sink may serve several classes at once
    // (their inputs are nonnegative and weights positive, so the ReLU is linear).
    bool shared_pools = true;
};

struct coefficient_record {
    std::string name;
    double target = 0.0;
    double achieved = 0.0;
    double error = 0.0;
    double budget = 0.0;
    int ground = 0;
    int chosen = 0;
    bool within_budget = true;
};

struct neuron_class_record {
    int layer = 0;
    int neuron = 0;
    std::string kind; // pos_input, neg_input, bias_pos, path, chain, knot, shared
    int source = -1;
};

struct ticket_report {
    prune_mask mask;
    std::vector<coefficient_record> coefficients;
    std::vector<path_record> paths;
    std::vector<neuron_class_record> classes;
    double lambda = 1.0;
    double eps = 0.0;
    double delta = 0.0;
    double sup_error = 0.0;
    long grid_points = 0;
    double fraction = 0.0;
    int budget_violations = 0;
    std::vector<std::string> failures;
    std::vector<std::string> notes;
    bool success = false;
};

struct linear_target {
    std::vector<std::vector<double>> W; // m x d
    std::vector<double> b;              // m
    std::vector<double> lo, hi;         // input box, defaults to [0,1]^d

    int m() const { return static_cast<int>(W.size()); }
    int d() const { return W.empty() ? 0 : static_cast<int>(W.front().size()); }
    void validate() const;
    double Q() const; // sup ||x||_1 + 1 over the box
    int nonzeros() const;
    double max_abs() const;
};

ticket_report prune_linear(const mother_net& net, const linear_target& target, double eps, double delta,
                           const prune_options& opt = {});

// Target is f_N on [lo, hi]; must be nonnegative there.
ticket_report prune_univariate(const mother_net& net, const pwl_rep& target, double lo, double hi, double eps,
                               double delta, const prune_options& opt = {});

enum class width_kind { linear, univariate };

int required_width(width_kind kind, double M, double N, double Q, int d, int m, int L0, double eps, double delta,
                   double C);

// Recomputes the sup error of a ticket from the dense evaluator.
sup_result recompute_error(const mother_net& net, const prune_mask& mask, const probe_grid& grid,
                           const target_fn& target);

namespace detail {

struct feature_ref {
    int col = 0;    // input column of layer in+1
    int sign = 1;   // feature value is relu(sign * z_col)
    double lo = 0.0, hi = 1.0; // domain of z_col
};

struct segment_spec {
    std::string label;
    int in = 0;
    int out = 0;
    std::vector<int> outputs;                // rows of layer `out`
    std::vector<feature_ref> features;
    std::vector<std::vector<double>> coef;   // [output][feature]
    std::vector<double> bias;                // [output]
    std::vector<double> budget;              // [output]
};

// Pruning state shared by the linear, univariate and family constructions.
// Works in the canonical sigma = 2 frame; the mask applies to the original net.
class construction {
public:
    construction(const mother_net& net, const prune_options& opt);

    const mother_net& canonical() const { return cn_; }
    ticket_report& report() { return report_; }
    const prune_options& options() const { return opt_; }

    // Returns false if the run had to abort (path failure).
    bool build_segment(const segment_spec& spec);
    bool build_univariate(const std::string& label, int in, int out, int in_col, int out_row, const pwl_rep& target,
                          double lo, double hi, double eps);

    void keep_weight(int l, int r, int c);
    void keep_bias(int l, int r);
    void claim(int l, int r, const std::string& kind, int source);
    bool claimed(int l, int r) const;

private:
    struct element {
        double value = 0.0;
        int layer = 0;
        int neuron = 0;
        int cls = 0;       // feature index or F for bias, -1 for the sink's own bias
        int sink = 0;      // -1: output directly, otherwise chain slot index
    };

    bool direct_univariate(const std::string& label, int in, int out, int in_col, int out_row, const pwl_rep& target,
                           double budget, const std::vector<int>& active);
    void solve_coefficient(const std::string& name, double target, double budget, const std::vector<double>& values,
                           std::vector<int>& chosen);

    mother_net cn_;
    prune_options opt_;
    ticket_report report_;
    std::vector<std::vector<char>> claimed_;
};

double univariate_budget(const pwl_rep& target, double lo, double hi, double eps);

} // namespace detail

} // namespace ult
