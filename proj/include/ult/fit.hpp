#pragma once

#include <string>
#include <vector>

namespace ult {

struct fit_result {
    std::vector<std::vector<double>> W; // m x k
    std::vector<double> c;              // m
    double residual = 0.0;              // sup residual on the evaluation set
    double condition = 0.0;             // of the design matrix [features, 1]
    bool rank_deficient = false;
    std::string warning;
};

// Least squares for W phi(x) + c ~ f(x). features: n x k, targets: n x m, n >= 10 (k + 1).
// Rank-deficient designs get a warning and the minimum-norm solution.
fit_result fit_last_layer(const std::vector<std::vector<double>>& features,
                          const std::vector<std::vector<double>>& targets);

// Sup over rows and outputs of |W phi + c - f|.
double fit_residual(const fit_result& fit, const std::vector<std::vector<double>>& features,
                    const std::vector<std::vector<double>>& targets);

} // namespace ult
