#include "gqcc/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "gqcc/errors.hpp"
#include "gqcc/parallel.hpp"

namespace gqcc {
namespace {

double weighted_lower_quantile(std::span<const double> y, std::span<const double> w, double tau) {
    std::vector<std::size_t> order;
    order.reserve(y.size());
    double total = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (w[i] > 0.0) {
            order.push_back(i);
            total += w[i];
        }
    }
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return y[a] < y[b]; });
    const double threshold = tau * total - 1e-12 * total;
    double cum = 0.0;
    for (std::size_t i : order) {
        cum += w[i];
        if (cum >= threshold) return y[i];
    }
    return y[order.back()];
}

// sum_i w_i psi(y_i - theta) / 2 for the expectile loss.
double expectile_score(std::span<const double> y, std::span<const double> w, double tau, double theta) {
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (w[i] <= 0.0) continue;
        const double u = y[i] - theta;
        s += w[i] * (u <= 0.0 ? (1.0 - tau) * (-u) : -tau * u);
    }
    return s;
}

double weighted_expectile(std::span<const double> y, std::span<const double> w, double tau) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (w[i] > 0.0) {
            lo = std::min(lo, y[i]);
            hi = std::max(hi, y[i]);
        }
    }
    const double range = hi - lo;
    if (range == 0.0) return lo;
    // The score is non-decreasing in theta: <= 0 at lo and >= 0 at hi.
    const double tol = 1e-10 * range;
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (expectile_score(y, w, tau, mid) < 0.0)
            lo = mid;
        else
            hi = mid;
        if (mid == lo && mid == hi) break;
    }
    // On [lo, hi] the score is linear; solve it exactly with the active weights.
    const double mid = 0.5 * (lo + hi);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (w[i] <= 0.0) continue;
        const double a = y[i] <= mid ? 1.0 - tau : tau;
        num += w[i] * a * y[i];
        den += w[i] * a;
    }
    const double exact = num / den;
    if (exact >= lo - tol && exact <= hi + tol) return exact;
    return mid;
}

std::string describe_point(std::span<const double> x) {
    std::ostringstream os;
    os << '(';
    for (std::size_t j = 0; j < x.size(); ++j) os << (j ? ", " : "") << x[j];
    os << ')';
    return os.str();
}

}  // namespace

double solve_weighted(const TaskSpec& spec, std::span<const double> y, std::span<const double> w) {
    double total = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i)
        if (w[i] > 0.0) total += w[i];
    if (!(total > 0.0)) throw EmptyNeighborhoodError("all weights are zero");
    switch (spec.family) {
        case Family::quantile: return weighted_lower_quantile(y, w, spec.tau);
        case Family::expectile: return weighted_expectile(y, w, spec.tau);
        case Family::mean: {
            double s = 0.0;
            for (std::size_t i = 0; i < y.size(); ++i)
                if (w[i] > 0.0) s += w[i] * y[i];
            return s / total;
        }
    }
    return 0.0;
}

double fit_point(const Dataset& data, const TaskSpec& spec, const ProductKernel& kernel,
                 std::span<const double> h, std::span<const double> x) {
    const auto w = weight_row(kernel, h, x, data);
    if (std::none_of(w.begin(), w.end(), [](double v) { return v > 0.0; }))
        throw EmptyNeighborhoodError("empty kernel neighbourhood at x = " + describe_point(x) +
                                     " with bandwidth h = " + describe_point(h));
    return solve_weighted(spec, data.y_data(), w);
}

FitSurface fit_surface(const Dataset& data, const TaskSpec& spec, const ProductKernel& kernel,
                       std::span<const double> h, const GridSpec& grid) {
    if (grid.dim() != data.dim()) throw ConfigError("grid dimension does not match the covariates");
    FitSurface out{grid, std::vector<double>(grid.size()), std::vector<double>(grid.size())};
    parallel_for(grid.size(), [&](std::size_t k) {
        const auto x = grid.point(k);
        const auto w = weight_row(kernel, h, x, data);
        const double total = std::accumulate(w.begin(), w.end(), 0.0);
        if (!(total > 0.0))
            throw EmptyNeighborhoodError("empty kernel neighbourhood at grid node " + std::to_string(k) +
                                         " x = " + describe_point(x) + " with bandwidth h = " +
                                         describe_point(h));
        out.weight_sum[k] = total;
        out.theta_hat[k] = solve_weighted(spec, data.y_data(), w);
    });
    return out;
}

std::vector<double> residuals(const Dataset& data, const PointEvaluator& fit) {
    std::vector<double> eps(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) eps[i] = data.y(i) - fit(data.x(i));
    return eps;
}

std::vector<double> fit_residuals(const Dataset& data, const TaskSpec& spec, const ProductKernel& kernel,
                                  std::span<const double> h) {
    std::vector<double> eps(data.size());
    parallel_for(data.size(),
                 [&](std::size_t i) { eps[i] = data.y(i) - fit_point(data, spec, kernel, h, data.x(i)); });
    return eps;
}

}  // namespace gqcc
