#include "gqcc/bootstrap.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gqcc/asymptotic.hpp"
#include "gqcc/errors.hpp"
#include "gqcc/parallel.hpp"

namespace gqcc {

std::string_view to_string(CenterMode m) { return m == CenterMode::analytic ? "analytic" : "empirical-mean"; }

std::string_view to_string(BootstrapVariant v) {
    return v == BootstrapVariant::standard ? "standard" : "quantile-ratio";
}

CenterMode parse_center_mode(std::string_view name) {
    if (name == "analytic") return CenterMode::analytic;
    if (name == "empirical-mean") return CenterMode::empirical_mean;
    throw ConfigError("unknown center mode '" + std::string(name) + "' (expected analytic or empirical-mean)");
}

BootstrapVariant parse_variant(std::string_view name) {
    if (name == "standard") return BootstrapVariant::standard;
    if (name == "quantile-ratio") return BootstrapVariant::quantile_ratio;
    throw ConfigError("unknown bootstrap variant '" + std::string(name) + "' (expected standard or quantile-ratio)");
}

void BootstrapConfig::validate() const {
    if (B < 100) throw ConfigError("bootstrap.B must be at least 100, got " + std::to_string(B));
}

BootstrapVariant BootstrapConfig::variant_for(const TaskSpec& spec) const {
    if (variant) return *variant;
    return spec.family == Family::quantile ? BootstrapVariant::quantile_ratio : BootstrapVariant::standard;
}

BootstrapSample resample(const Dataset& data, std::span<const double> residuals, double h0,
                         std::span<const double> hbar, const NuisanceKernels& kernels, Stream& rng) {
    const std::size_t n = data.size();
    const std::size_t d = data.dim();
    BootstrapSample s;
    s.dim = d;
    s.x.resize(n * d);
    s.eps.resize(n);
    const auto& base = kernels.L.base();
    for (std::size_t r = 0; r < n; ++r) {
        auto i = static_cast<std::size_t>(rng.uniform() * static_cast<double>(n));
        if (i >= n) i = n - 1;
        s.eps[r] = residuals[i] + h0 * kernels.g.sample(rng);
        for (std::size_t j = 0; j < d; ++j) {
            const double hj = hbar.size() == 1 ? hbar[0] : hbar[j];
            s.x[r * d + j] = data.x(i, j) + hj * base.sample(rng);
        }
    }
    return s;
}

double a_n_star(const BootstrapSample& sample, const TaskSpec& spec, const ProductKernel& kernel,
                std::span<const double> h, std::span<const double> x) {
    std::vector<double> u(sample.dim);
    double s = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const auto xi = sample.x_row(i);
        for (std::size_t j = 0; j < sample.dim; ++j) u[j] = x[j] - xi[j];
        const double k = kernel.scaled(u, h);
        if (k != 0.0) s += k * psi(spec, sample.eps[i]);
    }
    return s / static_cast<double>(sample.size());
}

void a_n_star_grid(const BootstrapSample& sample, const TaskSpec& spec, const ProductKernel& kernel,
                   std::span<const double> h, const GridSpec& grid, std::span<double> out) {
    const std::size_t d = grid.dim();
    std::fill(out.begin(), out.end(), 0.0);
    const auto& base = kernel.base();
    std::vector<std::vector<std::pair<std::size_t, double>>> hits(d);
    std::vector<std::size_t> pos(d), idx(d);
    const double inv_n = 1.0 / static_cast<double>(sample.size());

    for (std::size_t i = 0; i < sample.size(); ++i) {
        const auto xi = sample.x_row(i);
        bool empty = false;
        for (std::size_t j = 0; j < d && !empty; ++j) {
            const double hj = h.size() == 1 ? h[0] : h[j];
            const auto& ax = grid.axis(j);
            hits[j].clear();
            for (std::size_t k = 0; k < ax.count; ++k) {
                const double v = base((ax.node(k) - xi[j]) / hj) / hj;
                if (v != 0.0) hits[j].emplace_back(k, v);
            }
            empty = hits[j].empty();
        }
        if (empty) continue;
        const double p = psi(spec, sample.eps[i]) * inv_n;
        if (p == 0.0) continue;
        std::fill(pos.begin(), pos.end(), 0);
        while (true) {
            double w = p;
            for (std::size_t j = 0; j < d; ++j) {
                idx[j] = hits[j][pos[j]].first;
                w *= hits[j][pos[j]].second;
            }
            out[grid.ravel(idx)] += w;
            bool done = true;
            for (std::size_t j = d; j-- > 0;) {
                if (++pos[j] < hits[j].size()) {
                    done = false;
                    break;
                }
                pos[j] = 0;
            }
            if (done) break;
        }
    }
}

namespace {

void require_gaussian(const UnivariateKernel& g) {
    if (g.id() == KernelId::quartic)
        throw ConfigError("closed-form bootstrap moments need a Gaussian residual kernel g");
}

// E[V; V <= 0] and E[V; V > 0] for V ~ N(mu, s^2)
std::pair<double, double> partial_first(double mu, double s, const UnivariateKernel& g) {
    const double z = mu / s;
    const double dens = g(z);
    return {mu * g.cdf(-z) - s * dens, mu * g.cdf(z) + s * dens};
}

std::pair<double, double> partial_second(double mu, double s, const UnivariateKernel& g) {
    const double z = mu / s;
    const double dens = g(z);
    const double m2 = mu * mu + s * s;
    return {m2 * g.cdf(-z) - mu * s * dens, m2 * g.cdf(z) + mu * s * dens};
}

}  // namespace

double m_psi(const TaskSpec& spec, double eps_hat, double h0, const UnivariateKernel& g) {
    switch (spec.family) {
        case Family::quantile: return g.cdf(-eps_hat / h0) - spec.tau;
        case Family::expectile: {
            require_gaussian(g);
            const auto [lo, hi] = partial_first(eps_hat, h0, g);
            return -2.0 * ((1.0 - spec.tau) * lo + spec.tau * hi);
        }
        case Family::mean: require_gaussian(g); return 2.0 * eps_hat;
    }
    return 0.0;
}

double m2_psi(const TaskSpec& spec, double eps_hat, double h0, const UnivariateKernel& g) {
    const double tau = spec.tau;
    switch (spec.family) {
        case Family::quantile: return tau * tau + (1.0 - 2.0 * tau) * g.cdf(-eps_hat / h0);
        case Family::expectile: {
            require_gaussian(g);
            const auto [lo, hi] = partial_second(eps_hat, h0, g);
            return 4.0 * ((1.0 - tau) * (1.0 - tau) * lo + tau * tau * hi);
        }
        case Family::mean: require_gaussian(g); return 4.0 * (eps_hat * eps_hat + h0 * h0);
    }
    return 0.0;
}

double analytic_center(const Dataset& data, std::span<const double> residuals, const TaskSpec& spec,
                       const ProductKernel& kernel, std::span<const double> h, const ProductKernel& L,
                       std::span<const double> hbar, const UnivariateKernel& g, double h0,
                       std::span<const double> x) {
    const std::size_t d = data.dim();
    double s = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        double c = m_psi(spec, residuals[i], h0, g);
        for (std::size_t j = 0; j < d && c != 0.0; ++j) {
            const double hj = h.size() == 1 ? h[0] : h[j];
            const double bj = hbar.size() == 1 ? hbar[0] : hbar[j];
            c *= convolve_kernels(kernel.base(), hj, L.base(), bj, x[j] - data.x(i, j));
        }
        s += c;
    }
    return s / static_cast<double>(data.size());
}

std::vector<double> analytic_center_grid(const Dataset& data, std::span<const double> residuals,
                                         const TaskSpec& spec, const ProductKernel& kernel,
                                         std::span<const double> h, const ProductKernel& L,
                                         std::span<const double> hbar, const UnivariateKernel& g, double h0,
                                         const GridSpec& grid) {
    const std::size_t n = data.size();
    const std::size_t d = grid.dim();
    std::vector<double> m(n);
    for (std::size_t i = 0; i < n; ++i) m[i] = m_psi(spec, residuals[i], h0, g);

    // Per-axis tables conv[j][k * n + i] of the convolved kernel at node k.
    std::vector<std::vector<double>> conv(d);
    for (std::size_t j = 0; j < d; ++j) {
        const auto& ax = grid.axis(j);
        const double hj = h.size() == 1 ? h[0] : h[j];
        const double bj = hbar.size() == 1 ? hbar[0] : hbar[j];
        conv[j].resize(ax.count * n);
        parallel_for(ax.count * n, [&](std::size_t t) {
            const std::size_t k = t / n;
            const std::size_t i = t % n;
            conv[j][t] = convolve_kernels(kernel.base(), hj, L.base(), bj, ax.node(k) - data.x(i, j));
        });
    }

    std::vector<double> out(grid.size());
    parallel_for(grid.size(), [&](std::size_t node) {
        std::vector<std::size_t> idx(d);
        grid.unravel(node, idx);
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double c = m[i];
            for (std::size_t j = 0; j < d && c != 0.0; ++j) c *= conv[j][idx[j] * n + i];
            s += c;
        }
        out[node] = s / static_cast<double>(n);
    });
    return out;
}

std::vector<double> one_step(std::span<const double> sn, std::span<const double> a_star,
                             std::span<const double> center) {
    if (sn.size() != a_star.size() || sn.size() != center.size())
        throw ConfigError("one-step inputs are evaluated on different grids");
    std::vector<double> out(sn.size());
    for (std::size_t k = 0; k < sn.size(); ++k) {
        if (!(sn[k] > 0.0))
            throw NumericalError("scaling factor S_n,0,0 is not positive at grid node " + std::to_string(k));
        out[k] = (a_star[k] - center[k]) / sn[k];
    }
    return out;
}

double sup_statistic(std::span<const double> deviation, std::span<const double> weight) {
    if (deviation.size() != weight.size()) throw ConfigError("sup statistic inputs do not conform");
    double s = 0.0;
    for (std::size_t k = 0; k < deviation.size(); ++k) s = std::max(s, std::abs(weight[k] * deviation[k]));
    return s;
}

double bootstrap_quantile(std::vector<double> sups, double alpha) {
    if (sups.empty()) throw ConfigError("no bootstrap statistics");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
    const auto B = static_cast<double>(sups.size());
    auto rank = static_cast<std::size_t>(std::ceil((1.0 - alpha) * B - 1e-9));
    rank = std::clamp<std::size_t>(rank, 1, sups.size());
    std::nth_element(sups.begin(), sups.begin() + static_cast<std::ptrdiff_t>(rank - 1), sups.end());
    return sups[rank - 1];
}

double sigma_star_sq(const Dataset& data, std::span<const double> residuals, const UnivariateKernel& g,
                     double h0, const ProductKernel& L, std::span<const double> hbar, const TaskSpec& spec,
                     std::span<const double> x) {
    const auto w = weight_row(L, hbar, x, data);
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (w[i] == 0.0) continue;
        num += w[i] * m2_psi(spec, residuals[i], h0, g);
        den += w[i];
    }
    if (!(den > 0.0)) throw NumericalError("covariate density estimate vanishes; sigma*^2 undefined");
    return num / den;
}

BootstrapRun bootstrap_replicates(const BootstrapInputs& in, const BootstrapConfig& config, bool keep_deviations) {
    config.validate();
    const auto& grid = in.fit.grid;
    const std::size_t m = grid.size();
    const std::size_t B = config.B;

    BootstrapRun run;
    run.variant = config.variant_for(in.spec);
    if (run.variant == BootstrapVariant::quantile_ratio && in.spec.family != Family::quantile)
        throw ConfigError("the quantile-ratio bootstrap variant applies to the quantile family only");

    run.sn = sn_hat(in.spec, in.nuisance, grid);
    run.a_weight.resize(m);
    run.theta_weight.resize(m);
    for (std::size_t k = 0; k < m; ++k) {
        const double fx = in.nuisance.f_x[k];
        if (run.variant == BootstrapVariant::standard)
            run.a_weight[k] = 1.0 / std::sqrt(fx * in.nuisance.sigma_sq[k]);
        else
            run.a_weight[k] = in.nuisance.density_ratio[k] / std::sqrt(fx);
        run.theta_weight[k] = run.a_weight[k] * run.sn[k];
        if (!(run.theta_weight[k] > 0.0) || !std::isfinite(run.theta_weight[k])) {
            std::ostringstream os;
            os << "bootstrap studentisation weight is degenerate at grid node " << k << " x = (";
            const auto x = grid.point(k);
            for (std::size_t j = 0; j < x.size(); ++j) os << (j ? ", " : "") << x[j];
            os << ")";
            throw NumericalError(os.str());
        }
    }

    const Stream root(config.seed, {0xb0075ULL});
    std::vector<double> a(B * m);
    parallel_for(B, [&](std::size_t b) {
        Stream rng = root.substream(b);
        const auto sample = resample(in.data, in.residuals, in.plan.h0, in.plan.hbar, in.nuisance_kernels, rng);
        a_n_star_grid(sample, in.spec, in.kernel, in.plan.h, grid, std::span<double>(a.data() + b * m, m));
    });

    if (config.center == CenterMode::analytic) {
        run.center = analytic_center_grid(in.data, in.residuals, in.spec, in.kernel, in.plan.h,
                                          in.nuisance_kernels.L, in.plan.hbar, in.nuisance_kernels.g,
                                          in.plan.h0, grid);
    } else {
        run.center.assign(m, 0.0);
        for (std::size_t b = 0; b < B; ++b)
            for (std::size_t k = 0; k < m; ++k) run.center[k] += a[b * m + k];
        for (auto& c : run.center) c /= static_cast<double>(B);
    }

    run.sups.resize(B);
    if (keep_deviations) run.deviations.resize(B * m);
    for (std::size_t b = 0; b < B; ++b) {
        double s = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
            const double diff = a[b * m + k] - run.center[k];
            s = std::max(s, std::abs(run.a_weight[k] * diff));
            if (keep_deviations) run.deviations[b * m + k] = diff / run.sn[k];
        }
        run.sups[b] = s;
    }
    return run;
}

Corridor bootstrap_cc(const BootstrapInputs& in, const BootstrapConfig& config, double alpha) {
    const auto run = bootstrap_replicates(in, config);
    const double xi = bootstrap_quantile(run.sups, alpha);
    const auto& grid = in.fit.grid;

    Corridor cc;
    cc.grid = grid;
    cc.theta_hat = in.fit.theta_hat;
    cc.method = CorridorMethod::bootstrap;
    cc.alpha = alpha;
    cc.lower.resize(grid.size());
    cc.upper.resize(grid.size());
    double gap = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double half = xi / run.theta_weight[k];
        cc.lower[k] = in.fit.theta_hat[k] - half;
        cc.upper[k] = in.fit.theta_hat[k] + half;
        const auto x = grid.point(k);
        const double s2 = sigma_star_sq(in.data, in.residuals, in.nuisance_kernels.g, in.plan.h0,
                                        in.nuisance_kernels.L, in.plan.hbar, in.spec, x);
        gap = std::max(gap, std::abs(s2 - in.nuisance.sigma_sq_hat[k]));
    }
    auto& meta = cc.meta;
    meta.spec = in.spec;
    meta.n = in.data.size();
    meta.h = in.plan.h;
    meta.kappa = in.plan.kappa;
    meta.h0 = in.plan.h0;
    meta.hbar = in.plan.hbar;
    meta.h1 = in.plan.h1;
    meta.seed = config.seed;
    meta.replicates = config.B;
    meta.variant = std::string(to_string(run.variant));
    meta.center_mode = std::string(to_string(config.center));
    meta.xi = xi;
    meta.sigma_star_gap = gap;
    meta.floored = in.nuisance.floored;
    meta.warnings = in.plan.warnings;
    return cc;
}

}  // namespace gqcc
