#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "gqcc/bandwidth.hpp"
#include "gqcc/data.hpp"
#include "gqcc/estimator.hpp"
#include "gqcc/kernel.hpp"
#include "gqcc/loss.hpp"

namespace gqcc {

// Kernels of the residual-based smoothers: L over covariates, g (with cdf G)
// over residuals.
struct NuisanceKernels {
    ProductKernel L;
    UnivariateKernel g;

    static NuisanceKernels gaussian(std::size_t dim) {
        return {ProductKernel(UnivariateKernel::gaussian(), dim),
                UnivariateKernel(KernelId::gaussian_cdf_derivative)};
    }
};

// n^{-1} sum_i L_hbar(x - X_i)
double f_x_hat(const Dataset& data, const ProductKernel& L, std::span<const double> hbar,
               std::span<const double> x);

// sum_i G((v - eps_i)/h0) L_i / sum_i L_i
double cond_cdf_eps(const Dataset& data, std::span<const double> residuals, const UnivariateKernel& g, double h0,
                    const ProductKernel& L, std::span<const double> hbar, double v, std::span<const double> x);

// sum_i g_h0(v - eps_i) L_i / sum_i L_i
double cond_density_eps(const Dataset& data, std::span<const double> residuals, const UnivariateKernel& g,
                        double h0, const ProductKernel& L, std::span<const double> hbar, double v,
                        std::span<const double> x);

// sum_i psi^2(eps_i) L_i / sum_i L_i
double sigma_sq_hat(const Dataset& data, std::span<const double> residuals, const TaskSpec& spec,
                    const ProductKernel& L, std::span<const double> hbar, std::span<const double> x);

// sum_i g_h1(Y_i - theta) L_i / sum_i L_i
double f_y_hat(const Dataset& data, double theta, const UnivariateKernel& g, double h1, const ProductKernel& L,
               std::span<const double> hbar, std::span<const double> x);

/// f_{Y|X}(theta_hat(x) | x) / f_{eps|X}(0 | x). With h1 = h0 and
/// Y_i - theta_hat(x) = eps_i the two sums coincide and the ratio is one.
double density_ratio(const Dataset& data, std::span<const double> residuals, double theta_hat_x,
                     const UnivariateKernel& g, double h0, double h1, const ProductKernel& L,
                     std::span<const double> hbar, std::span<const double> x);

struct NuisanceFit {
    std::vector<double> f_x;
    std::vector<double> F_eps_at_0;
    std::vector<double> f_eps_at_0;
    std::vector<double> sigma_sq_hat;   // residual estimate for every family
    std::vector<double> sigma_sq;       // value used in scaling (tau(1-tau) for quantiles)
    std::vector<double> f_y_at_thetahat;
    std::vector<double> density_ratio;
    std::size_t floored = 0;            // entries lifted to the 1e-12 floor
};

inline constexpr double kDensityFloor = 1e-12;

/// Evaluates every scaling ingredient on the fit's grid.
/// @throws NumericalError if f_X vanishes at a node.
NuisanceFit compute_nuisance(const Dataset& data, std::span<const double> residuals, const FitSurface& fit,
                             const TaskSpec& spec, const BandwidthPlan& plan, const NuisanceKernels& kernels);

}  // namespace gqcc
