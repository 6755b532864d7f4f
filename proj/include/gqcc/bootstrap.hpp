#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "gqcc/bandwidth.hpp"
#include "gqcc/corridor.hpp"
#include "gqcc/estimator.hpp"
#include "gqcc/kernel.hpp"
#include "gqcc/nuisance.hpp"
#include "gqcc/rng.hpp"

namespace gqcc {

enum class CenterMode { analytic, empirical_mean };
enum class BootstrapVariant { standard, quantile_ratio };

std::string_view to_string(CenterMode m);
std::string_view to_string(BootstrapVariant v);
CenterMode parse_center_mode(std::string_view name);
BootstrapVariant parse_variant(std::string_view name);

struct BootstrapConfig {
    std::size_t B = 1000;
    std::uint64_t seed = 0;
    CenterMode center = CenterMode::analytic;
    // Unset: quantile-ratio for quantiles, standard otherwise.
    std::optional<BootstrapVariant> variant;

    // @throws ConfigError if B < 100.
    void validate() const;
    [[nodiscard]] BootstrapVariant variant_for(const TaskSpec& spec) const;
};

/// Draws (X*, eps*) from the smoothed joint law of covariates and residuals.
struct BootstrapSample {
    std::vector<double> x;     // row-major, n x dim
    std::vector<double> eps;
    std::size_t dim = 1;

    [[nodiscard]] std::size_t size() const { return eps.size(); }
    [[nodiscard]] std::span<const double> x_row(std::size_t i) const { return {x.data() + i * dim, dim}; }
};

// Pick i uniformly, then eps* = eps_i + h0 Z_g and X* = X_i + hbar (.) Z_L.
BootstrapSample resample(const Dataset& data, std::span<const double> residuals, double h0,
                         std::span<const double> hbar, const NuisanceKernels& kernels, Stream& rng);

// n^{-1} sum_i K_h(x - X_i*) psi(eps_i*)
double a_n_star(const BootstrapSample& sample, const TaskSpec& spec, const ProductKernel& kernel,
                std::span<const double> h, std::span<const double> x);

// a_n_star at every grid node, accumulated point by point over the kernel support.
void a_n_star_grid(const BootstrapSample& sample, const TaskSpec& spec, const ProductKernel& kernel,
                   std::span<const double> h, const GridSpec& grid, std::span<double> out);

/// First and second moments of psi(V) for V ~ eps_hat + h0 Z, Z ~ g.
/// Quantiles accept any symmetric g; the expectile and mean forms assume
/// the Gaussian g and throw ConfigError otherwise.
double m_psi(const TaskSpec& spec, double eps_hat, double h0, const UnivariateKernel& g);
double m2_psi(const TaskSpec& spec, double eps_hat, double h0, const UnivariateKernel& g);

/// E*[A_n*(x)] = n^{-1} sum_i prod_j (K_{h_j} * L_{hbar_j})(x_j - X_ij) m_psi(eps_i).
double analytic_center(const Dataset& data, std::span<const double> residuals, const TaskSpec& spec,
                       const ProductKernel& kernel, std::span<const double> h, const ProductKernel& L,
                       std::span<const double> hbar, const UnivariateKernel& g, double h0,
                       std::span<const double> x);

std::vector<double> analytic_center_grid(const Dataset& data, std::span<const double> residuals,
                                         const TaskSpec& spec, const ProductKernel& kernel,
                                         std::span<const double> h, const ProductKernel& L,
                                         std::span<const double> hbar, const UnivariateKernel& g, double h0,
                                         const GridSpec& grid);

/// (A* - E*A*) / S_hat, elementwise.
/// @throws NumericalError where S_hat <= 0.
std::vector<double> one_step(std::span<const double> sn, std::span<const double> a_star,
                             std::span<const double> center);

// max_x |weight(x) deviation(x)|
double sup_statistic(std::span<const double> deviation, std::span<const double> weight);

// The ceil((1 - alpha) B)-th order statistic.
double bootstrap_quantile(std::vector<double> sups, double alpha);

/// E*[psi(eps*)^2 | X* = x] under the smoothed law.
double sigma_star_sq(const Dataset& data, std::span<const double> residuals, const UnivariateKernel& g,
                     double h0, const ProductKernel& L, std::span<const double> hbar, const TaskSpec& spec,
                     std::span<const double> x);

struct BootstrapInputs {
    const Dataset& data;
    std::span<const double> residuals;
    const FitSurface& fit;
    const NuisanceFit& nuisance;
    const TaskSpec& spec;
    const BandwidthPlan& plan;
    const ProductKernel& kernel;
    const NuisanceKernels& nuisance_kernels;
};

struct BootstrapRun {
    std::vector<double> sups;
    std::vector<double> center;         // E*A* (or the replicate mean)
    std::vector<double> sn;
    std::vector<double> a_weight;       // multiplies A* - E*A* in the sup statistic
    std::vector<double> theta_weight;   // a_weight * S_hat; half-width = xi / theta_weight
    std::vector<double> deviations;     // B x grid, theta* - theta_hat; only when requested
    BootstrapVariant variant = BootstrapVariant::standard;
};

BootstrapRun bootstrap_replicates(const BootstrapInputs& in, const BootstrapConfig& config,
                                  bool keep_deviations = false);

/// Corridor theta_hat(x) +/- xi*_alpha / theta_weight(x).
Corridor bootstrap_cc(const BootstrapInputs& in, const BootstrapConfig& config, double alpha);

}  // namespace gqcc
