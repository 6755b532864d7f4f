#include "gqcc/kernel.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>

#include "gqcc/data.hpp"
#include "gqcc/errors.hpp"
#include "gqcc/quadrature.hpp"

namespace gqcc {
namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014327;

double gaussian_pdf(double u) { return kInvSqrt2Pi * std::exp(-0.5 * u * u); }

// Integral of f over the kernel's support. `power` is the power of the kernel
// appearing in f, which sets the Gaussian tail envelope for unbounded kernels.
double integrate_over_support(const UnivariateKernel& k, const std::function<double(double)>& f, int power,
                              std::size_t order) {
    if (auto a = k.support_radius()) {
        const auto& rule = gauss_legendre(order);
        double s = 0.0;
        for (std::size_t i = 0; i < rule.nodes.size(); ++i) s += rule.weights[i] * f(*a * rule.nodes[i]);
        return s * *a;
    }
    // exp(-x^2) weight with u = scale * x matches an exp(-power u^2 / (2 s^2)) tail.
    const double scale = k.tail_scale() * std::sqrt(2.0 / power);
    const auto& rule = gauss_hermite(order);
    double s = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const double x = rule.nodes[i];
        s += rule.weights[i] * (std::exp(x * x) * f(scale * x));
    }
    return s * scale;
}

double settled_integral(const UnivariateKernel& k, const std::function<double(double)>& f, int power,
                        std::size_t order, const char* what) {
    const double full = integrate_over_support(k, f, power, order);
    const double half = integrate_over_support(k, f, power, std::max<std::size_t>(order / 2, 8));
    if (!std::isfinite(full) || std::abs(full - half) > 1e-8 * std::max(1.0, std::abs(full)))
        throw NumericalError(std::string("kernel constant '") + what + "' did not converge for kernel " +
                             std::string(k.name()));
    return full;
}

}  // namespace

std::string_view to_string(KernelId id) {
    switch (id) {
        case KernelId::quartic: return "quartic";
        case KernelId::gaussian_density: return "gaussian-density";
        case KernelId::gaussian_cdf_derivative: return "gaussian-cdf-derivative";
    }
    return "unknown";
}

KernelId parse_kernel_id(std::string_view name) {
    if (name == "quartic" || name == "biweight") return KernelId::quartic;
    if (name == "gaussian-density" || name == "gaussian") return KernelId::gaussian_density;
    if (name == "gaussian-cdf-derivative") return KernelId::gaussian_cdf_derivative;
    throw ConfigError("unknown kernel '" + std::string(name) + "'");
}

double UnivariateKernel::operator()(double u) const {
    if (id_ == KernelId::quartic) {
        if (std::abs(u) > 1.0) return 0.0;
        const double t = 1.0 - u * u;
        return 0.9375 * t * t;
    }
    return gaussian_pdf(u);
}

double UnivariateKernel::derivative(double u) const {
    if (id_ == KernelId::quartic) {
        if (std::abs(u) > 1.0) return 0.0;
        return -3.75 * u * (1.0 - u * u);
    }
    return -u * gaussian_pdf(u);
}

double UnivariateKernel::cdf(double u) const {
    if (id_ == KernelId::quartic) {
        if (u <= -1.0) return 0.0;
        if (u >= 1.0) return 1.0;
        const double u2 = u * u;
        return 0.5 + 0.9375 * u * (1.0 - 2.0 * u2 / 3.0 + u2 * u2 / 5.0);
    }
    return 0.5 * std::erfc(-u / std::numbers::sqrt2);
}

std::optional<double> UnivariateKernel::support_radius() const {
    if (id_ == KernelId::quartic) return 1.0;
    return std::nullopt;
}

double UnivariateKernel::sample(Stream& rng) const {
    if (id_ == KernelId::quartic) {
        // The median of five uniforms is Beta(3,3); 2B - 1 has density (15/16)(1-u^2)^2.
        double u[5];
        for (double& v : u) v = rng.uniform();
        std::nth_element(u, u + 2, u + 5);
        return 2.0 * u[2] - 1.0;
    }
    return rng.normal();
}

ProductKernel::ProductKernel(UnivariateKernel base, std::size_t dim) : base_(base), dim_(dim) {
    if (dim_ == 0) throw ConfigError("product kernel dimension must be >= 1");
}

double ProductKernel::operator()(std::span<const double> u) const {
    double v = 1.0;
    for (std::size_t j = 0; j < dim_ && v != 0.0; ++j) v *= base_(u[j]);
    return v;
}

double ProductKernel::scaled(std::span<const double> u, std::span<const double> h) const {
    double v = 1.0;
    for (std::size_t j = 0; j < dim_ && v != 0.0; ++j) {
        const double hj = h.size() == 1 ? h[0] : h[j];
        v *= base_(u[j] / hj) / hj;
    }
    return v;
}

double KernelConstants::l2norm() const { return std::sqrt(l2norm_sq); }

KernelConstants kernel_constants(const ProductKernel& kernel, std::size_t quad_order) {
    const auto& k = kernel.base();
    const std::size_t d = kernel.dim();
    KernelConstants c;
    c.dim = d;
    c.mass = settled_integral(k, [&](double u) { return k(u); }, 1, quad_order, "mass");
    c.l2norm_sq_1d = settled_integral(k, [&](double u) { return k(u) * k(u); }, 2, quad_order, "L2 norm");
    c.deriv_sq_1d = settled_integral(
        k, [&](double u) { return k.derivative(u) * k.derivative(u); }, 2, quad_order, "derivative L2 norm");
    const double cross =
        settled_integral(k, [&](double u) { return k(u) * k.derivative(u); }, 2, quad_order, "K K'");

    c.l2norm_sq = std::pow(c.l2norm_sq_1d, static_cast<double>(d));
    c.sigma.assign(d * d, 0.0);
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            if (i == j)
                c.sigma[i * d + j] = c.deriv_sq_1d * std::pow(c.l2norm_sq_1d, static_cast<double>(d - 1));
            else
                c.sigma[i * d + j] = cross * cross * std::pow(c.l2norm_sq_1d, static_cast<double>(d - 2));
        }
    }
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> sigma(
        c.sigma.data(), static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    const double det = sigma.determinant();
    if (!(det > 0.0)) throw NumericalError("kernel derivative Gram matrix is singular");
    c.h2 = std::pow(2.0 * std::numbers::pi * c.l2norm_sq, -0.5 * static_cast<double>(d)) * std::sqrt(det);
    return c;
}

std::vector<double> weight_row(const ProductKernel& kernel, std::span<const double> h, std::span<const double> x,
                               const Dataset& data) {
    const std::size_t d = data.dim();
    std::vector<double> w(data.size(), 0.0);
    std::vector<double> diff(d);
    const auto radius = kernel.base().support_radius();
    for (std::size_t i = 0; i < data.size(); ++i) {
        bool inside = true;
        for (std::size_t j = 0; j < d; ++j) {
            diff[j] = x[j] - data.x(i, j);
            const double hj = h.size() == 1 ? h[0] : h[j];
            if (radius && std::abs(diff[j]) > *radius * hj) {
                inside = false;
                break;
            }
        }
        if (inside) w[i] = kernel.scaled(diff, h);
    }
    return w;
}

double convolve_kernels(const UnivariateKernel& a, double h_a, const UnivariateKernel& b, double h_b, double t) {
    if (!(h_a > 0.0) || !(h_b > 0.0)) throw ConfigError("convolution bandwidths must be positive");
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    if (auto ra = a.support_radius()) {
        lo = t - *ra * h_a;
        hi = t + *ra * h_a;
    }
    if (auto rb = b.support_radius()) {
        lo = std::max(lo, -*rb * h_b);
        hi = std::min(hi, *rb * h_b);
    }
    if (!(lo < hi)) return 0.0;
    auto f = [&](double s) { return a((t - s) / h_a) / h_a * b(s / h_b) / h_b; };
    using boost::math::quadrature::gauss_kronrod;
    return gauss_kronrod<double, 31>::integrate(f, lo, hi, 15, 1e-10);
}

}  // namespace gqcc
