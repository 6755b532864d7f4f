#pragma once

#include <functional>
#include <span>
#include <vector>

#include "gqcc/data.hpp"
#include "gqcc/kernel.hpp"
#include "gqcc/loss.hpp"

namespace gqcc {

/// Exact minimiser of sum_i w_i rho(y_i - theta) over theta.
///
/// Quantile: the smallest order statistic whose cumulative weight reaches
/// tau * W (lower quantile). Expectile: root of sum_i w_i psi(y_i - theta),
/// bracketed by the extreme responses with positive weight and bisected to
/// 1e-10 of their range, then snapped to the exact root of the linear piece.
/// Mean: weighted average. Entries with w_i <= 0 are ignored.
double solve_weighted(const TaskSpec& spec, std::span<const double> y, std::span<const double> w);

/// Local constant M-estimate at x.
/// @throws EmptyNeighborhoodError if every kernel weight at x vanishes.
double fit_point(const Dataset& data, const TaskSpec& spec, const ProductKernel& kernel,
                 std::span<const double> h, std::span<const double> x);

struct FitSurface {
    GridSpec grid;
    std::vector<double> theta_hat;
    std::vector<double> weight_sum;
};

FitSurface fit_surface(const Dataset& data, const TaskSpec& spec, const ProductKernel& kernel,
                       std::span<const double> h, const GridSpec& grid);

using PointEvaluator = std::function<double(std::span<const double>)>;

// eps_i = Y_i - theta(X_i)
std::vector<double> residuals(const Dataset& data, const PointEvaluator& fit);

// Residuals of the local fit evaluated at each X_i with the same bandwidth.
std::vector<double> fit_residuals(const Dataset& data, const TaskSpec& spec, const ProductKernel& kernel,
                                  std::span<const double> h);

}  // namespace gqcc
