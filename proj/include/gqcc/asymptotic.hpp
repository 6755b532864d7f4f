#pragma once

#include <cstddef>
#include <vector>

#include "gqcc/bandwidth.hpp"
#include "gqcc/corridor.hpp"
#include "gqcc/estimator.hpp"
#include "gqcc/kernel.hpp"
#include "gqcc/nuisance.hpp"

namespace gqcc {

// exp(-2 exp(-a)): limit law of the normalised maximal deviation.
double gumbel_cdf(double a);

// c(alpha) = log 2 - log|log(1 - alpha)|, so gumbel_cdf(c(alpha)) = 1 - alpha.
double c_alpha(double alpha);

struct GumbelConstants {
    double d_n = 0.0;
    double kappa = 0.0;
    std::size_t dim = 1;
    double h2 = 0.0;
    double c_alpha = 0.0;
    double log_scale = 0.0;   // 2 d kappa log n (+ 2 log vol(D) when normalised)

    // d_n + c(alpha) (2 d kappa log n)^{-1/2}
    [[nodiscard]] double critical_value() const;
};

/// d_n = (2 d kappa log n)^{1/2} + (2 d kappa log n)^{-1/2}
///       [ (d-1)/2 log log n^kappa + log{(2 pi)^{-1/2} H2 (2d)^{(d-1)/2}} ].
///
/// `log_volume` adds log vol(D) to d kappa log n, i.e. counts kernel cells
/// vol(D)/h^d on a region of non-unit measure. Zero reproduces the formula
/// as stated for vol(D) = 1.
/// @throws NumericalError if kappa <= 0 or the effective log term is not positive.
GumbelConstants critical_constants(std::size_t n, std::size_t dim, double kappa, const KernelConstants& kc,
                                   double alpha, double log_volume = 0.0);

/// S_{n,0,0}(x) plug-in per family: f_eps(0|x) f_X(x) for quantiles,
/// 2{tau - F_eps(0|x)(2 tau - 1)} f_X(x) for expectiles, 2 f_X(x) for the mean.
/// @throws NumericalError at a node where it is not positive.
std::vector<double> sn_hat(const TaskSpec& spec, const NuisanceFit& nuisance, const GridSpec& grid);

struct AsymptoticOptions {
    double alpha = 0.05;
    bool volume_normalization = false;
};

/// Gumbel-limit corridor theta_hat(x) +/- (n h^d)^{-1/2} ||K||_2 {d_n + c(alpha)(2 kappa d log n)^{-1/2}}
/// * sqrt(f_X(x) sigma^2(x)) / S_{n,0,0}(x).
Corridor asymptotic_cc(const FitSurface& fit, const NuisanceFit& nuisance, const TaskSpec& spec,
                       const BandwidthPlan& plan, const KernelConstants& kc, std::size_t n,
                       const AsymptoticOptions& opts);

}  // namespace gqcc
