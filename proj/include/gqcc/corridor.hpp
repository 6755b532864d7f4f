#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gqcc/data.hpp"
#include "gqcc/loss.hpp"

namespace gqcc {

enum class CorridorMethod { asymptotic, bootstrap };

std::string_view to_string(CorridorMethod m);
CorridorMethod parse_method(std::string_view name);

struct CorridorMeta {
    TaskSpec spec;
    std::size_t n = 0;
    std::vector<double> h;
    double kappa = 0.0;
    double h0 = 0.0;
    std::vector<double> hbar;
    double h1 = 0.0;
    // asymptotic
    double d_n = 0.0;
    double c_alpha = 0.0;
    double critical_value = 0.0;
    // bootstrap
    std::optional<std::uint64_t> seed;
    std::size_t replicates = 0;
    std::string variant;
    std::string center_mode;
    double xi = 0.0;
    double sigma_star_gap = 0.0;   // sup_x |sigma*^2 - sigma_hat^2|
    std::size_t floored = 0;
    std::vector<std::string> warnings;
};

/// Simultaneous band (lower, upper) around theta_hat on a grid.
struct Corridor {
    GridSpec grid;
    std::vector<double> theta_hat;
    std::vector<double> lower;
    std::vector<double> upper;
    CorridorMethod method = CorridorMethod::asymptotic;
    double alpha = 0.05;
    CorridorMeta meta;
};

/// Complete coverage: lower <= truth <= upper at every node.
/// @throws ConfigError when the truth is not evaluated on the corridor grid.
bool covers(const Corridor& corridor, const GridSpec& truth_grid, std::span<const double> truth);
bool covers(const Corridor& corridor, std::span<const double> truth);

// Mean width over the grid nodes.
double corridor_volume(const Corridor& corridor);
// Mean width times the measure of the grid box.
double corridor_volume_scaled(const Corridor& corridor);

}  // namespace gqcc
