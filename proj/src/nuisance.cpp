#include "gqcc/nuisance.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>

#include "gqcc/errors.hpp"
#include "gqcc/parallel.hpp"

namespace gqcc {
namespace {

double l_sum(const std::vector<double>& w) {
    double s = 0.0;
    for (double v : w) s += v;
    return s;
}

std::vector<double> l_weights(const Dataset& data, const ProductKernel& L, std::span<const double> hbar,
                              std::span<const double> x) {
    return weight_row(L, hbar, x, data);
}

[[noreturn]] void throw_undefined(std::span<const double> x) {
    std::ostringstream os;
    os << "covariate density estimate vanishes at x = (";
    for (std::size_t j = 0; j < x.size(); ++j) os << (j ? ", " : "") << x[j];
    os << "); conditional estimates are undefined";
    throw NumericalError(os.str());
}

}  // namespace

double f_x_hat(const Dataset& data, const ProductKernel& L, std::span<const double> hbar,
               std::span<const double> x) {
    return l_sum(l_weights(data, L, hbar, x)) / static_cast<double>(data.size());
}

double cond_cdf_eps(const Dataset& data, std::span<const double> residuals, const UnivariateKernel& g, double h0,
                    const ProductKernel& L, std::span<const double> hbar, double v, std::span<const double> x) {
    const auto w = l_weights(data, L, hbar, x);
    const double total = l_sum(w);
    if (!(total > 0.0)) throw_undefined(x);
    double s = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i)
        if (w[i] > 0.0) s += w[i] * g.cdf((v - residuals[i]) / h0);
    return std::clamp(s / total, 0.0, 1.0);
}

double cond_density_eps(const Dataset& data, std::span<const double> residuals, const UnivariateKernel& g,
                        double h0, const ProductKernel& L, std::span<const double> hbar, double v,
                        std::span<const double> x) {
    const auto w = l_weights(data, L, hbar, x);
    const double total = l_sum(w);
    if (!(total > 0.0)) throw_undefined(x);
    double s = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i)
        if (w[i] > 0.0) s += w[i] * g((v - residuals[i]) / h0) / h0;
    return s / total;
}

double sigma_sq_hat(const Dataset& data, std::span<const double> residuals, const TaskSpec& spec,
                    const ProductKernel& L, std::span<const double> hbar, std::span<const double> x) {
    const auto w = l_weights(data, L, hbar, x);
    const double total = l_sum(w);
    if (!(total > 0.0)) throw_undefined(x);
    double s = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        const double p = psi(spec, residuals[i]);
        s += w[i] * p * p;
    }
    return s / total;
}

double f_y_hat(const Dataset& data, double theta, const UnivariateKernel& g, double h1, const ProductKernel& L,
               std::span<const double> hbar, std::span<const double> x) {
    const auto w = l_weights(data, L, hbar, x);
    const double total = l_sum(w);
    if (!(total > 0.0)) throw_undefined(x);
    double s = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i)
        if (w[i] > 0.0) s += w[i] * g((data.y(i) - theta) / h1) / h1;
    return s / total;
}

double density_ratio(const Dataset& data, std::span<const double> residuals, double theta_hat_x,
                     const UnivariateKernel& g, double h0, double h1, const ProductKernel& L,
                     std::span<const double> hbar, std::span<const double> x) {
    const double num = f_y_hat(data, theta_hat_x, g, h1, L, hbar, x);
    const double den = cond_density_eps(data, residuals, g, h0, L, hbar, 0.0, x);
    if (!(den > 0.0)) throw NumericalError("degenerate residual density: f_eps(0|x) = 0 in the density ratio");
    return num / den;
}

NuisanceFit compute_nuisance(const Dataset& data, std::span<const double> residuals, const FitSurface& fit,
                             const TaskSpec& spec, const BandwidthPlan& plan, const NuisanceKernels& kernels) {
    const std::size_t m = fit.grid.size();
    NuisanceFit nf;
    nf.f_x.resize(m);
    nf.F_eps_at_0.resize(m);
    nf.f_eps_at_0.resize(m);
    nf.sigma_sq_hat.resize(m);
    nf.sigma_sq.resize(m);
    nf.f_y_at_thetahat.resize(m);
    nf.density_ratio.resize(m);
    std::atomic<std::size_t> floored{0};
    const auto theory = sigma_sq_theoretical(spec);
    const double n = static_cast<double>(data.size());
    const auto& g = kernels.g;

    parallel_for(m, [&](std::size_t k) {
        const auto x = fit.grid.point(k);
        const auto w = l_weights(data, kernels.L, plan.hbar, x);
        const double total = l_sum(w);
        if (!(total > 0.0)) throw_undefined(x);
        double cdf0 = 0.0, dens0 = 0.0, psi2 = 0.0, fy = 0.0;
        for (std::size_t i = 0; i < w.size(); ++i) {
            if (w[i] <= 0.0) continue;
            const double e = residuals[i];
            cdf0 += w[i] * g.cdf(-e / plan.h0);
            dens0 += w[i] * g(e / plan.h0) / plan.h0;
            const double p = psi(spec, e);
            psi2 += w[i] * p * p;
            fy += w[i] * g((data.y(i) - fit.theta_hat[k]) / plan.h1) / plan.h1;
        }
        auto floor = [&](double v) {
            if (v < kDensityFloor) {
                floored.fetch_add(1, std::memory_order_relaxed);
                return kDensityFloor;
            }
            return v;
        };
        nf.f_x[k] = total / n;
        nf.F_eps_at_0[k] = std::clamp(cdf0 / total, 0.0, 1.0);
        nf.f_eps_at_0[k] = floor(dens0 / total);
        nf.sigma_sq_hat[k] = psi2 / total;
        nf.sigma_sq[k] = theory ? *theory : nf.sigma_sq_hat[k];
        nf.f_y_at_thetahat[k] = floor(fy / total);
        nf.density_ratio[k] = nf.f_y_at_thetahat[k] / nf.f_eps_at_0[k];
    });
    nf.floored = floored.load();
    return nf;
}

}  // namespace gqcc
