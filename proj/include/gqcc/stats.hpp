#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace gqcc {

// sup_t |F_n(t) - cdf(t)|
double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf);

// sup_t |F_a(t) - F_b(t)|
double ks_two_sample(std::vector<double> a, std::vector<double> b);

/// Asymptotic Kolmogorov tail P(K > sqrt(n_eff) d) with the Stephens
/// small-sample correction; n_eff = n for one sample and
/// n_a n_b / (n_a + n_b) for two.
double kolmogorov_pvalue(double d, double n_eff);

double mean(std::span<const double> v);
double median(std::vector<double> v);

}  // namespace gqcc
