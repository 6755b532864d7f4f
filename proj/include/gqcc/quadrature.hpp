#pragma once

#include <cstddef>
#include <vector>

namespace gqcc {

struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

// Gauss-Legendre rule on [-1, 1] (Golub-Welsch).
QuadratureRule gauss_legendre(std::size_t order);

// Gauss-Hermite rule for the weight exp(-x^2) on the real line.
QuadratureRule gauss_hermite(std::size_t order);

}  // namespace gqcc
