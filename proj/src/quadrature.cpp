#include "gqcc/quadrature.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "gqcc/errors.hpp"

namespace gqcc {
namespace {

// Golub-Welsch: eigen-decomposition of the Jacobi matrix with zero diagonal
// and the given off-diagonal; weights are mu0 * (first eigenvector component)^2.
QuadratureRule golub_welsch(const Eigen::VectorXd& offdiag, double mu0) {
    const auto n = offdiag.size() + 1;
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.computeFromTridiagonal(diag, offdiag, Eigen::ComputeEigenvectors);
    if (solver.info() != Eigen::Success) throw NumericalError("quadrature eigen-solve failed");
    QuadratureRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        rule.nodes[k] = solver.eigenvalues()[k];
        const double v0 = solver.eigenvectors()(0, k);
        rule.weights[k] = mu0 * v0 * v0;
    }
    return rule;
}

QuadratureRule build_legendre(std::size_t order) {
    if (order == 1) return {{0.0}, {2.0}};
    Eigen::VectorXd beta(order - 1);
    for (std::size_t k = 1; k < order; ++k) {
        const double kk = static_cast<double>(k);
        beta[k - 1] = kk / std::sqrt(4.0 * kk * kk - 1.0);
    }
    auto rule = golub_welsch(beta, 2.0);
    // Newton polish on P_n; the eigen-solver is only accurate to ~1e-14.
    for (std::size_t k = 0; k < order; ++k) {
        double x = rule.nodes[k];
        double dp = 1.0;
        for (int it = 0; it < 4; ++it) {
            double p0 = 1.0, p1 = x;
            for (std::size_t m = 2; m <= order; ++m) {
                const double mm = static_cast<double>(m);
                const double p2 = ((2.0 * mm - 1.0) * x * p1 - (mm - 1.0) * p0) / mm;
                p0 = p1;
                p1 = p2;
            }
            dp = static_cast<double>(order) * (x * p1 - p0) / (x * x - 1.0);
            x -= p1 / dp;
        }
        rule.nodes[k] = x;
        rule.weights[k] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    return rule;
}

QuadratureRule build_hermite(std::size_t order) {
    if (order == 1) return {{0.0}, {std::sqrt(std::numbers::pi)}};
    Eigen::VectorXd beta(order - 1);
    for (std::size_t k = 1; k < order; ++k) beta[k - 1] = std::sqrt(static_cast<double>(k) / 2.0);
    return golub_welsch(beta, std::sqrt(std::numbers::pi));
}

template <class Build>
const QuadratureRule& cached(std::map<std::size_t, QuadratureRule>& cache, std::mutex& mu, std::size_t order,
                             Build build) {
    if (order == 0) throw ConfigError("quadrature order must be positive");
    std::lock_guard lock(mu);
    auto it = cache.find(order);
    if (it == cache.end()) it = cache.emplace(order, build(order)).first;
    return it->second;
}

}  // namespace

QuadratureRule gauss_legendre(std::size_t order) {
    static std::map<std::size_t, QuadratureRule> cache;
    static std::mutex mu;
    return cached(cache, mu, order, build_legendre);
}

QuadratureRule gauss_hermite(std::size_t order) {
    static std::map<std::size_t, QuadratureRule> cache;
    static std::mutex mu;
    return cached(cache, mu, order, build_hermite);
}

}  // namespace gqcc
