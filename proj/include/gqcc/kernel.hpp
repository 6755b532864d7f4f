#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gqcc/rng.hpp"

namespace gqcc {

class Dataset;

enum class KernelId {
    quartic,
    gaussian_density,
    // The density g = G' paired with the Gaussian cdf G of the residual smoother.
    gaussian_cdf_derivative,
};

std::string_view to_string(KernelId id);
KernelId parse_kernel_id(std::string_view name);

/// Symmetric second-order univariate kernel with its derivative,
/// antiderivative (cdf) and an exact sampler.
class UnivariateKernel {
public:
    explicit UnivariateKernel(KernelId id = KernelId::quartic) : id_(id) {}

    static UnivariateKernel quartic() { return UnivariateKernel(KernelId::quartic); }
    static UnivariateKernel gaussian() { return UnivariateKernel(KernelId::gaussian_density); }

    [[nodiscard]] KernelId id() const { return id_; }
    [[nodiscard]] std::string_view name() const { return to_string(id_); }

    [[nodiscard]] double operator()(double u) const;
    [[nodiscard]] double derivative(double u) const;
    [[nodiscard]] double cdf(double u) const;

    // Support [-A, A]; empty for unbounded kernels.
    [[nodiscard]] std::optional<double> support_radius() const;

    // For unbounded kernels, sd of the Gaussian envelope of the tails.
    [[nodiscard]] double tail_scale() const { return 1.0; }

    [[nodiscard]] double sample(Stream& rng) const;

    friend bool operator==(const UnivariateKernel&, const UnivariateKernel&) = default;

private:
    KernelId id_;
};

/// d-fold product of a univariate kernel, K(u) = prod_j K(u_j).
class ProductKernel {
public:
    ProductKernel(UnivariateKernel base, std::size_t dim);

    [[nodiscard]] const UnivariateKernel& base() const { return base_; }
    [[nodiscard]] std::size_t dim() const { return dim_; }

    [[nodiscard]] double operator()(std::span<const double> u) const;

    // K_h(u) = prod_j h_j^{-1} K(u_j / h_j); a scalar h is passed as a
    // length-one span and applied to every coordinate.
    [[nodiscard]] double scaled(std::span<const double> u, std::span<const double> h) const;

private:
    UnivariateKernel base_;
    std::size_t dim_;
};

struct KernelConstants {
    std::size_t dim = 1;
    double mass = 1.0;            // univariate integral of K
    double l2norm_sq_1d = 0.0;    // univariate integral of K^2
    double deriv_sq_1d = 0.0;     // univariate integral of K'^2
    double l2norm_sq = 0.0;       // d-dim ||K||_2^2
    std::vector<double> sigma;    // d x d, row-major: Sigma_ij = int dK/du_i dK/du_j
    double h2 = 0.0;              // (2 pi ||K||^2)^{-d/2} det(Sigma)^{1/2}

    [[nodiscard]] double l2norm() const;
    [[nodiscard]] double sigma_at(std::size_t i, std::size_t j) const { return sigma[i * dim + j]; }
};

// Deterministic quadrature of the kernel constants. Throws NumericalError if
// the integrals do not settle (halving the order changes them by > 1e-8).
KernelConstants kernel_constants(const ProductKernel& kernel, std::size_t quad_order = 200);

/// w_i = K_h(x - X_i) for every row of the design.
std::vector<double> weight_row(const ProductKernel& kernel, std::span<const double> h,
                               std::span<const double> x, const Dataset& data);

/// (a_{h_a} * b_{h_b})(t) = int h_a^{-1} a((t-s)/h_a) h_b^{-1} b(s/h_b) ds,
/// by adaptive Gauss-Kronrod quadrature.
double convolve_kernels(const UnivariateKernel& a, double h_a, const UnivariateKernel& b, double h_b,
                        double t);

}  // namespace gqcc
