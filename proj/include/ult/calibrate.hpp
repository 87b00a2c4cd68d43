#pragma once

#include "ult/subsum.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace ult {

// Containment constants (h, alpha) and value bound B per distribution.
struct distribution_constants {
    double h = 1.0;
    double alpha = 1.0;
    double B = 1.0;
};
distribution_constants constants_for(distribution d);

enum class formula_id { subset_sum, subset_sum_extended };
formula_id parse_formula(const std::string& s);
std::string to_string(formula_id f);

struct calibration_grid {
    std::vector<double> eps;
    std::vector<double> delta;
    double m = 1.0;
    int trials = 200;
    int n_max = 48;
};

struct calibration_point {
    double eps = 0, delta = 0;
    int n_required = 0;
    double success = 0;
};

struct calibration_result {
    std::string key; // formula/distribution
    double C = 0.0;
    bool converged = false;
    std::vector<calibration_point> points;
};

// Smallest C in [0.1, 100] (factor-2 bracketing from 1, then bisection to three
// significant digits) with success >= 1 - delta at every grid point. Throws
// construction_error if no C in the range works.
calibration_result calibrate(distribution d, formula_id f, const calibration_grid& grid, std::uint64_t seed);

int required_n(distribution d, formula_id f, double m, double eps, double delta, double C);

// Calibration file: YAML map key -> C.
std::map<std::string, double> load_calibration(const std::string& path);
void store_calibration(const std::string& path, const std::map<std::string, double>& values);

} // namespace ult
