#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "gqcc/bandwidth.hpp"
#include "gqcc/bootstrap.hpp"
#include "gqcc/corridor.hpp"
#include "gqcc/data.hpp"
#include "gqcc/kernel.hpp"
#include "gqcc/loss.hpp"
#include "gqcc/rng.hpp"

namespace gqcc {

enum class VarianceMode { homogeneous, heterogeneous };

std::string_view to_string(VarianceMode m);
VarianceMode parse_variance_mode(std::string_view name);

// Pearson correlation of the dependent uniform covariates.
inline constexpr double kCovariateCorrelation = 0.2876;

/// Gaussian-copula parameter whose uniform marginals have Pearson
/// correlation `corr`: rho = 2 sin(pi corr / 6).
double copula_rho_for(double corr);

/// Y = sin(2 pi x1) + x2 + sigma(x) eps with eps ~ N(0, 1) and covariates
/// uniform on [0, 1]^2 joined by a Gaussian copula.
struct DGPSpec {
    std::size_t n = 100;
    double sigma0 = 0.5;
    VarianceMode mode = VarianceMode::homogeneous;
    double correlation = kCovariateCorrelation;

    void validate() const;
};

double true_function(double x1, double x2);
// sigma0, or sigma0 + 0.8 x1(1-x1) x2(1-x2) in the heterogeneous design.
double noise_scale(const DGPSpec& dgp, double x1, double x2);

Dataset generate(const DGPSpec& dgp, Stream& rng);

/// Expectile of N(0, 1): root of tau E(Z-e)_+ = (1-tau) E(e-Z)_+,
/// bisected to 1e-10 and cached per tau.
double standard_normal_expectile(double tau);

// True quantile / expectile / mean surface of the design on `grid`.
std::vector<double> truth_surface(const DGPSpec& dgp, const TaskSpec& spec, const GridSpec& grid);

struct Cell {
    CorridorMethod method = CorridorMethod::asymptotic;
    TaskSpec spec;
    std::size_t n = 100;
    double sigma0 = 0.5;
    VarianceMode mode = VarianceMode::homogeneous;
};

std::string cell_label(const Cell& cell);

struct StudyConfig {
    std::size_t replicates = 200;
    std::uint64_t seed = 20240101;
    double alpha = 0.05;
    GridSpec grid = GridSpec::standard(2);
    BootstrapConfig bootstrap{500, 0, CenterMode::analytic, std::nullopt};
    // Conditional-density reference pilot, h1 = 1.5 h0 in the density-ratio
    // correction, and at least three points under every grid node's kernel.
    BandwidthOptions bandwidth{BandwidthMode::automatic, {}, PilotRule::conditional_density, 0.05, std::nullopt, 1.5,
                               1.0, 3};
    bool volume_normalization = false;
    double max_failure_rate = 0.05;
};

struct CellResult {
    Cell cell;
    std::size_t replicates = 0;
    std::size_t failures = 0;
    std::size_t covered = 0;
    double coverage = 0.0;        // among trials that completed
    double standard_error = 0.0;  // sqrt(p(1-p)/R)
    double mean_volume = 0.0;          // mean corridor width
    double mean_region_volume = 0.0;   // width integrated over the grid region
    double wall_seconds = 0.0;
    std::vector<std::string> failure_messages;   // first few, for the log
};

/// Runs `replicates` generate -> fit -> corridor -> covers trials per cell.
/// Trial r of every cell sharing (n, sigma0, mode) sees the same sample, so
/// methods are compared on paired data.
/// @throws NumericalError if more than max_failure_rate of a cell's trials fail.
std::vector<CellResult> coverage_study(const std::vector<Cell>& cells, const StudyConfig& config);

/// Cross product methods x sigma0 x n x tau x modes for one family.
std::vector<Cell> table_cells(Family family, const std::vector<CorridorMethod>& methods,
                              const std::vector<double>& sigma0s, const std::vector<std::size_t>& ns,
                              const std::vector<double>& taus, const std::vector<VarianceMode>& modes);

// One row per cell; deterministic for a fixed seed (no timings).
std::string report_csv(const std::vector<CellResult>& results);

// Text table: rows method / sigma0 / n, columns mode x tau, entries coverage(volume).
std::string report_table(const std::vector<CellResult>& results);

// Row-major lattice (last axis fastest) of a field divided by its sd.
struct FieldLattice {
    std::vector<std::size_t> shape;
    double step = 0.0;
    std::vector<double> values;
};

/// Simulates h^{-d/2} int K((x-u)/h) dW(u) on a lattice of spacing h/resolution
/// covering the grid box, normalised to unit variance.
/// @throws ConfigError if resolution < 10.
FieldLattice gaussian_field(const ProductKernel& kernel, double h, const GridSpec& region, Stream& rng,
                            std::size_t resolution = 10);

/// Simulates h^{-d/2} int K((x-u)/h) dW(u) on a lattice of spacing h/resolution
/// covering the grid box and returns sup |Y| / sd over lattice points inside it.
/// @throws ConfigError if resolution < 10.
double gaussian_field_sup(const ProductKernel& kernel, double h, const GridSpec& region, Stream& rng,
                          std::size_t resolution = 10);

// Variance of the unnormalised lattice field; tends to ||K||_2^2 as resolution grows.
double gaussian_field_variance(const ProductKernel& kernel, double h, std::size_t resolution = 10);

}  // namespace gqcc
