#include "gqcc/loss.hpp"

#include <cmath>

#include "gqcc/errors.hpp"

namespace gqcc {

std::string_view to_string(Family f) {
    switch (f) {
        case Family::quantile: return "quantile";
        case Family::expectile: return "expectile";
        case Family::mean: return "mean";
    }
    return "unknown";
}

Family parse_family(std::string_view name) {
    if (name == "quantile") return Family::quantile;
    if (name == "expectile") return Family::expectile;
    if (name == "mean") return Family::mean;
    throw ConfigError("unknown family '" + std::string(name) + "' (expected quantile, expectile or mean)");
}

void TaskSpec::validate() const {
    if (family != Family::mean && !(tau > 0.0 && tau < 1.0))
        throw ConfigError("tau must lie in (0, 1), got " + std::to_string(tau));
}

double rho(const TaskSpec& spec, double u) {
    switch (spec.family) {
        case Family::quantile: return std::abs((u < 0.0 ? 1.0 : 0.0) - spec.tau) * std::abs(u);
        case Family::expectile: return std::abs((u < 0.0 ? 1.0 : 0.0) - spec.tau) * u * u;
        case Family::mean: return u * u;
    }
    return 0.0;
}

double psi(const TaskSpec& spec, double u) {
    switch (spec.family) {
        case Family::quantile: return (u < 0.0 ? 1.0 : 0.0) - spec.tau;
        case Family::expectile: return 2.0 * ((u <= 0.0 ? 1.0 : 0.0) - spec.tau) * std::abs(u);
        case Family::mean: return 2.0 * u;
    }
    return 0.0;
}

std::optional<double> sigma_sq_theoretical(const TaskSpec& spec) {
    if (spec.family == Family::quantile) return spec.tau * (1.0 - spec.tau);
    return std::nullopt;
}

}  // namespace gqcc
