#include "gqcc/asymptotic.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "gqcc/errors.hpp"

namespace gqcc {

double gumbel_cdf(double a) { return std::exp(-2.0 * std::exp(-a)); }

double c_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
    return std::log(2.0) - std::log(std::abs(std::log1p(-alpha)));
}

double GumbelConstants::critical_value() const { return d_n + c_alpha / std::sqrt(log_scale); }

GumbelConstants critical_constants(std::size_t n, std::size_t dim, double kappa, const KernelConstants& kc,
                                   double alpha, double log_volume) {
    if (!(kappa > 0.0)) {
        std::ostringstream os;
        os << "kappa = " << kappa << " must be positive for the Gumbel constants";
        throw NumericalError(os.str());
    }
    if (!(kc.h2 > 0.0)) throw NumericalError("H2 must be positive");
    const double d = static_cast<double>(dim);
    const double cells = d * kappa * std::log(static_cast<double>(n)) + log_volume;
    if (!(cells > 0.0)) throw NumericalError("effective log-cell count d kappa log n + log vol(D) is not positive");

    GumbelConstants g;
    g.kappa = kappa;
    g.dim = dim;
    g.h2 = kc.h2;
    g.c_alpha = c_alpha(alpha);
    g.log_scale = 2.0 * cells;
    const double root = std::sqrt(g.log_scale);
    // log log n^kappa = log(kappa log n) = log(cells / d)
    const double bracket = 0.5 * (d - 1.0) * std::log(cells / d) +
                           std::log(kc.h2 * std::pow(2.0 * d, 0.5 * (d - 1.0)) / std::sqrt(2.0 * std::numbers::pi));
    g.d_n = root + bracket / root;
    return g;
}

std::vector<double> sn_hat(const TaskSpec& spec, const NuisanceFit& nuisance, const GridSpec& grid) {
    const std::size_t m = nuisance.f_x.size();
    std::vector<double> s(m);
    for (std::size_t k = 0; k < m; ++k) {
        switch (spec.family) {
            case Family::quantile: s[k] = nuisance.f_eps_at_0[k] * nuisance.f_x[k]; break;
            case Family::expectile:
                s[k] = 2.0 * (spec.tau - nuisance.F_eps_at_0[k] * (2.0 * spec.tau - 1.0)) * nuisance.f_x[k];
                break;
            case Family::mean: s[k] = 2.0 * nuisance.f_x[k]; break;
        }
        if (!(s[k] > 0.0)) {
            std::ostringstream os;
            os << "scaling factor S_n,0,0 is not positive at grid node " << k << " x = (";
            const auto x = grid.point(k);
            for (std::size_t j = 0; j < x.size(); ++j) os << (j ? ", " : "") << x[j];
            os << ")";
            throw NumericalError(os.str());
        }
    }
    return s;
}

Corridor asymptotic_cc(const FitSurface& fit, const NuisanceFit& nuisance, const TaskSpec& spec,
                       const BandwidthPlan& plan, const KernelConstants& kc, std::size_t n,
                       const AsymptoticOptions& opts) {
    const double log_volume = opts.volume_normalization ? std::log(fit.grid.volume()) : 0.0;
    const auto g = critical_constants(n, fit.grid.dim(), plan.kappa, kc, opts.alpha, log_volume);
    const auto s = sn_hat(spec, nuisance, fit.grid);
    const double base = kc.l2norm() * g.critical_value() / std::sqrt(static_cast<double>(n) * plan.h_product());

    Corridor cc;
    cc.grid = fit.grid;
    cc.theta_hat = fit.theta_hat;
    cc.method = CorridorMethod::asymptotic;
    cc.alpha = opts.alpha;
    cc.lower.resize(fit.grid.size());
    cc.upper.resize(fit.grid.size());
    for (std::size_t k = 0; k < fit.grid.size(); ++k) {
        const double half = base * std::sqrt(nuisance.f_x[k] * nuisance.sigma_sq[k]) / s[k];
        cc.lower[k] = fit.theta_hat[k] - half;
        cc.upper[k] = fit.theta_hat[k] + half;
    }
    cc.meta.spec = spec;
    cc.meta.n = n;
    cc.meta.h = plan.h;
    cc.meta.kappa = plan.kappa;
    cc.meta.h0 = plan.h0;
    cc.meta.hbar = plan.hbar;
    cc.meta.h1 = plan.h1;
    cc.meta.d_n = g.d_n;
    cc.meta.c_alpha = g.c_alpha;
    cc.meta.critical_value = g.critical_value();
    cc.meta.floored = nuisance.floored;
    cc.meta.warnings = plan.warnings;
    return cc;
}

}  // namespace gqcc
