#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace gqcc {

enum class Family { quantile, expectile, mean };

std::string_view to_string(Family f);
Family parse_family(std::string_view name);

/// Loss family plus level tau; tau is ignored by the mean family.
struct TaskSpec {
    Family family = Family::quantile;
    double tau = 0.5;

    static TaskSpec quantile(double tau) { return {Family::quantile, tau}; }
    static TaskSpec expectile(double tau) { return {Family::expectile, tau}; }
    static TaskSpec mean() { return {Family::mean, 0.5}; }

    // Throws ConfigError unless tau lies in (0, 1).
    void validate() const;

    friend bool operator==(const TaskSpec&, const TaskSpec&) = default;
};

// rho_tau(u) = |1(u<0) - tau| |u|^k  (k = 1 quantile, k = 2 expectile); u^2 for the mean.
double rho(const TaskSpec& spec, double u);

// quantile: 1(u<0) - tau; expectile: 2(1(u<=0) - tau)|u|; mean: 2u.
double psi(const TaskSpec& spec, double u);

// tau(1 - tau) for quantiles; the other families need the residual estimate.
std::optional<double> sigma_sq_theoretical(const TaskSpec& spec);

}  // namespace gqcc
