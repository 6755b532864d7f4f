#include "gqcc/bandwidth.hpp"

#include <boost/math/distributions/normal.hpp>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "gqcc/errors.hpp"

namespace gqcc {

double sample_sd(std::span<const double> v) {
    if (v.size() < 2) return 0.0;
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

double BandwidthPlan::h_product() const {
    double p = 1.0;
    for (double v : h) p *= v;
    return p;
}

std::vector<double> rule_of_thumb(const Dataset& data, PilotRule rule) {
    const auto n = static_cast<double>(data.size());
    // The conditional-density reference counts the response as one more smoothed variable.
    const auto d = static_cast<double>(data.dim()) + (rule == PilotRule::conditional_density ? 1.0 : 0.0);
    std::vector<double> h(data.dim());
    for (std::size_t j = 0; j < data.dim(); ++j) {
        const double sd = sample_sd(data.column(j));
        if (!(sd > 0.0)) throw DataError("covariate " + std::to_string(j + 1) + " has zero variance");
        h[j] = 1.06 * sd * std::pow(n, -1.0 / (4.0 + d));
    }
    return h;
}

double yu_jones_factor(double tau) {
    if (!(tau > 0.0 && tau < 1.0)) throw ConfigError("Yu-Jones rescaling needs tau in (0, 1)");
    const boost::math::normal_distribution<double> std_normal;
    const double z = boost::math::quantile(std_normal, tau);
    const double phi = boost::math::pdf(std_normal, z);
    return std::pow(tau * (1.0 - tau) / (phi * phi), 0.2);
}

std::vector<double> yu_jones_rescale(std::span<const double> h_pilot, double tau) {
    const double f = yu_jones_factor(tau);
    std::vector<double> h(h_pilot.begin(), h_pilot.end());
    for (double& v : h) v *= f;
    return h;
}

double undersmooth_factor(std::size_t n, double delta) { return std::pow(static_cast<double>(n), -delta); }

std::vector<double> undersmooth(std::span<const double> h, std::size_t n, double delta) {
    const double f = undersmooth_factor(n, delta);
    std::vector<double> out(h.begin(), h.end());
    for (double& v : out) v *= f;
    return out;
}

NuisanceBandwidths nuisance_bandwidths(const Dataset& data, double residual_sd) {
    if (!(residual_sd > 0.0)) throw NumericalError("degenerate residuals: standard deviation is zero");
    const auto n = static_cast<double>(data.size());
    const double rate = std::pow(n, -1.0 / (5.0 + static_cast<double>(data.dim())));
    NuisanceBandwidths nb;
    nb.h0 = 1.06 * residual_sd * rate;
    nb.hbar.resize(data.dim());
    for (std::size_t j = 0; j < data.dim(); ++j) {
        const double sd = sample_sd(data.column(j));
        if (!(sd > 0.0)) throw DataError("covariate " + std::to_string(j + 1) + " has zero variance");
        nb.hbar[j] = 1.06 * sd * rate;
    }
    return nb;
}

double kappa_of(std::span<const double> h, std::size_t n) {
    double log_sum = 0.0;
    for (double v : h) log_sum += std::log(v);
    const double log_geomean = log_sum / static_cast<double>(h.size());
    return -log_geomean / std::log(static_cast<double>(n));
}

std::string_view to_string(PilotRule r) {
    return r == PilotRule::regression ? "regression" : "conditional-density";
}

PilotRule parse_pilot_rule(std::string_view name) {
    if (name == "regression") return PilotRule::regression;
    if (name == "conditional-density") return PilotRule::conditional_density;
    throw ConfigError("unknown pilot rule '" + std::string(name) + "' (expected regression or conditional-density)");
}

std::vector<double> estimation_bandwidths(const Dataset& data, const TaskSpec& spec, const BandwidthOptions& opts) {
    std::vector<double> h;
    if (opts.mode == BandwidthMode::manual) {
        if (opts.manual_h.size() == 1)
            h.assign(data.dim(), opts.manual_h[0]);
        else if (opts.manual_h.size() == data.dim())
            h = opts.manual_h;
        else
            throw ConfigError("manual bandwidth needs 1 or " + std::to_string(data.dim()) + " values");
        for (double v : h)
            if (!(v > 0.0)) throw ConfigError("manual bandwidths must be positive");
    } else {
        h = rule_of_thumb(data, opts.pilot);
    }
    const bool yj = opts.yu_jones.value_or(spec.family == Family::quantile);
    if (yj) h = yu_jones_rescale(h, spec.tau);
    if (opts.delta < 0.0) throw ConfigError("undersmoothing exponent must be non-negative");
    if (opts.delta > 0.0) h = undersmooth(h, data.size(), opts.delta);
    if (!(opts.level_inflation > 0.0)) throw ConfigError("bandwidth inflation must be positive");
    for (double& v : h) v *= opts.level_inflation;
    return h;
}

BandwidthPlan complete_plan(const Dataset& data, std::vector<double> h, std::span<const double> residuals,
                            const BandwidthOptions& opts) {
    if (!(opts.h1_inflation >= 1.0)) throw ConfigError("h1 inflation must be >= 1");
    BandwidthPlan plan;
    plan.delta = opts.delta;
    plan.h = std::move(h);
    plan.kappa = kappa_of(plan.h, data.size());
    const auto nb = nuisance_bandwidths(data, sample_sd(residuals));
    plan.h0 = nb.h0;
    plan.hbar = nb.hbar;
    plan.h1 = nb.h0 * opts.h1_inflation;

    const double n = static_cast<double>(data.size());
    const double d = static_cast<double>(data.dim());
    if (!(plan.kappa > 0.0 && plan.kappa < 1.0 / d)) {
        std::ostringstream os;
        os << "kappa = " << plan.kappa << " lies outside (0, 1/d); n h^d does not diverge at this rate";
        plan.warnings.push_back(os.str());
    }
    const double log_n = std::log(n);
    const double ratio = n * plan.h_product() / (log_n * log_n);
    if (ratio < 1.0) {
        std::ostringstream os;
        os << "n h^d / (log n)^2 = " << ratio << " < 1; the bandwidth may be too small for n = " << data.size();
        plan.warnings.push_back(os.str());
    }
    return plan;
}

double support_guard_factor(const Dataset& data, std::span<const double> h, const GridSpec& grid,
                            std::optional<double> support_radius, std::size_t k) {
    if (!support_radius || k == 0) return 1.0;
    if (k > data.size()) throw ConfigError("support guard asks for more neighbours than there are observations");
    const std::size_t d = data.dim();
    double factor = 1.0;
    std::vector<double> x(d);
    std::vector<double> reach(data.size());
    for (std::size_t node = 0; node < grid.size(); ++node) {
        grid.point(node, x);
        for (std::size_t i = 0; i < data.size(); ++i) {
            double r = 0.0;
            for (std::size_t j = 0; j < d; ++j) {
                const double hj = h.size() == 1 ? h[0] : h[j];
                r = std::max(r, std::abs(x[j] - data.x(i, j)) / (hj * *support_radius));
            }
            reach[i] = r;
        }
        std::nth_element(reach.begin(), reach.begin() + static_cast<std::ptrdiff_t>(k - 1), reach.end());
        factor = std::max(factor, reach[k - 1]);
    }
    // Strict inequality at the support edge.
    return factor > 1.0 ? factor * (1.0 + 1e-9) : 1.0;
}

}  // namespace gqcc
