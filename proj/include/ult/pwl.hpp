#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace ult {

// f_N(x) = sum_{i<N} a_i relu(x - s_i) + a_N
struct pwl_rep {
    std::vector<double> knots;  // s_0 < ... < s_{N-1}
    std::vector<double> coeffs; // a_0 ... a_N

    int N() const { return static_cast<int>(knots.size()); }
    void validate() const;
    double operator()(double x) const;
    double lo() const { return knots.front(); }
    double hi() const { return knots.back(); }
};

double eval(const pwl_rep& rep, double x);

// How the representation continues to the right of the last knot.
enum class pwl_extension { linear, flat };

// Interpolates f on N equidistant knots spanning [s0, s_last].
pwl_rep from_samples(const std::function<double(double)>& f, double s0, double s_last, int N,
                     pwl_extension ext = pwl_extension::flat);

enum class pwl_family { log, exp, sin };
pwl_family parse_pwl_family(const std::string& s);

// Knot counts from the polynomial and Fourier theorems. For sin, eps is eps_sin
// and t, k, m are ignored.
int choose_N(pwl_family family, double eps, double t = 1, double k = 1, double m = 1);

// 4 sin(pi * Delta) with Delta = domain_length / (N - 1); requires Delta <= 1/2.
double sin_error_bound(int N, double domain_length);
double log_error_bound(double delta);  // Delta^2 / 4
double exp_error_bound(double delta);  // Delta^2 / 8

struct error_budget_t {
    double eps_a = 0;
    double eps_s = 0;
    bool scale_floor_applied = false; // max{|s_0|,|s_{N-1}|} < 1 was lifted to 1
};

error_budget_t error_budget(const pwl_rep& rep, double eps);

// Standard targets used by the families.
double log_target(double x);              // log((1 + x) / 2)
double exp_clamped(double y, double t);   // exp(y) clamped to [0.5^t, 1]
double sin_target(double x);              // sin(2 pi x)

// Sup of |f - g| on a uniform grid with `points` nodes over [lo, hi].
double sup_grid_error(const std::function<double(double)>& f, const std::function<double(double)>& g,
                      double lo, double hi, long points);

} // namespace ult
