#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gqcc/data.hpp"
#include "gqcc/loss.hpp"

namespace gqcc {

enum class BandwidthMode { automatic, manual };

// Exponent of the Gaussian-reference pilot: n^{-1/(4+d)} for a regression in d
// covariates, n^{-1/(5+d)} when the response is smoothed as well.
enum class PilotRule { regression, conditional_density };

std::string_view to_string(PilotRule r);
PilotRule parse_pilot_rule(std::string_view name);

struct BandwidthOptions {
    BandwidthMode mode = BandwidthMode::automatic;
    // Manual pilot bandwidths, one per covariate (or a single shared value).
    std::vector<double> manual_h;
    PilotRule pilot = PilotRule::regression;
    // Undersmoothing exponent; 0 disables undersmoothing.
    double delta = 0.05;
    // Yu-Jones rescaling of the pilot; defaults to on for the quantile family only.
    std::optional<bool> yu_jones;
    // h1 = h1_inflation * h0 for the conditional density of Y.
    double h1_inflation = 1.0;
    // Extra multiplier on the estimation bandwidth (tail levels in group comparisons).
    double level_inflation = 1.0;
    // When positive, the estimation bandwidth is scaled up by the smallest common
    // factor that puts this many design points inside every grid node's kernel
    // support. Zero keeps empty neighbourhoods as errors.
    std::size_t min_neighbors = 0;
};

struct BandwidthPlan {
    std::vector<double> h;      // estimation bandwidth per covariate
    double kappa = 0.0;         // -log(geomean h) / log n
    double h0 = 0.0;            // residual direction
    std::vector<double> hbar;   // covariate direction of the nuisance smoothers
    double h1 = 0.0;            // response direction of f_{Y|X}
    double delta = 0.05;
    std::vector<std::string> warnings;

    [[nodiscard]] double h_product() const;
};

// Gaussian-reference pilot h_j = 1.06 sd(X_j) n^{-1/(4+d)} (or n^{-1/(5+d)}).
std::vector<double> rule_of_thumb(const Dataset& data, PilotRule rule = PilotRule::regression);

// {tau(1-tau) / phi(Phi^{-1}(tau))^2}^{1/5}
double yu_jones_factor(double tau);
std::vector<double> yu_jones_rescale(std::span<const double> h_pilot, double tau);

// n^{-delta}
double undersmooth_factor(std::size_t n, double delta);
std::vector<double> undersmooth(std::span<const double> h, std::size_t n, double delta);

struct NuisanceBandwidths {
    double h0 = 0.0;
    std::vector<double> hbar;
};

// h0 = 1.06 sd(eps) n^{-1/(5+d)},  hbar_j = 1.06 sd(X_j) n^{-1/(5+d)}.
NuisanceBandwidths nuisance_bandwidths(const Dataset& data, double residual_sd);

double kappa_of(std::span<const double> h, std::size_t n);

// Pilot -> (Yu-Jones) -> undersmoothing -> level inflation.
std::vector<double> estimation_bandwidths(const Dataset& data, const TaskSpec& spec, const BandwidthOptions& opts);

// Adds the residual-based nuisance bandwidths and kappa to an estimation bandwidth.
BandwidthPlan complete_plan(const Dataset& data, std::vector<double> h, std::span<const double> residuals,
                            const BandwidthOptions& opts);

double sample_sd(std::span<const double> v);

/// Smallest c >= 1 such that every grid node has at least k points X_i with
/// |x_j - X_ij| < c h_j A for all j, where [-A, A] is the kernel support.
/// Returns 1 for unbounded kernels.
double support_guard_factor(const Dataset& data, std::span<const double> h, const GridSpec& grid,
                            std::optional<double> support_radius, std::size_t k);

}  // namespace gqcc
