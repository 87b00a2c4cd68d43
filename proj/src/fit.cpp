#include "ult/fit.hpp"

#include "ult/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace ult {

namespace {

constexpr double condition_limit = 1e10;

void check_rows(const std::vector<std::vector<double>>& rows, std::size_t width, const char* what) {
    for (const auto& r : rows)
        if (r.size() != width) throw shape_error(std::string(what) + " rows differ in length");
}

} // namespace

fit_result fit_last_layer(const std::vector<std::vector<double>>& features,
                          const std::vector<std::vector<double>>& targets) {
    if (features.empty() || targets.size() != features.size())
        throw shape_error("fit needs one target row per feature row");
    const auto n = static_cast<Eigen::Index>(features.size());
    const auto k = static_cast<Eigen::Index>(features.front().size());
    const auto m = static_cast<Eigen::Index>(targets.front().size());
    check_rows(features, static_cast<std::size_t>(k), "feature");
    check_rows(targets, static_cast<std::size_t>(m), "target");
    if (n < 10 * (k + 1)) throw shape_error("fit needs at least 10 (k + 1) sample points");

    Eigen::MatrixXd A(n, k + 1);
    Eigen::MatrixXd Y(n, m);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < k; ++j) A(i, j) = features[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        A(i, k) = 1.0;
        for (Eigen::Index j = 0; j < m; ++j) Y(i, j) = targets[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }

    fit_result r;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
    const auto& sv = svd.singularValues();
    r.condition = sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1) : std::numeric_limits<double>::infinity();
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(A);
    cod.setThreshold(1.0 / condition_limit);
    if (cod.rank() < k + 1 || r.condition > condition_limit) {
        r.rank_deficient = true;
        r.warning = "design matrix is ill-conditioned (condition " + std::to_string(r.condition) + ", rank " +
                    std::to_string(cod.rank()) + " of " + std::to_string(k + 1) + "); minimum-norm solution";
    }
    const Eigen::MatrixXd X = cod.solve(Y); // (k+1) x m, minimum norm when rank deficient

    r.W.assign(static_cast<std::size_t>(m), std::vector<double>(static_cast<std::size_t>(k)));
    r.c.assign(static_cast<std::size_t>(m), 0.0);
    for (Eigen::Index o = 0; o < m; ++o) {
        for (Eigen::Index j = 0; j < k; ++j) r.W[static_cast<std::size_t>(o)][static_cast<std::size_t>(j)] = X(j, o);
        r.c[static_cast<std::size_t>(o)] = X(k, o);
    }
    r.residual = fit_residual(r, features, targets);
    return r;
}

double fit_residual(const fit_result& fit, const std::vector<std::vector<double>>& features,
                    const std::vector<std::vector<double>>& targets) {
    if (features.size() != targets.size()) throw shape_error("fit residual needs matching rows");
    double worst = 0.0;
    for (std::size_t i = 0; i < features.size(); ++i) {
        for (std::size_t o = 0; o < fit.W.size(); ++o) {
            double v = fit.c[o];
            for (std::size_t j = 0; j < fit.W[o].size(); ++j) v += fit.W[o][j] * features[i][j];
            worst = std::max(worst, std::abs(v - targets[i][o]));
        }
    }
    return worst;
}

} // namespace ult
