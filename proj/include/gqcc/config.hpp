#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gqcc/bandwidth.hpp"
#include "gqcc/bootstrap.hpp"
#include "gqcc/corridor.hpp"
#include "gqcc/data.hpp"
#include "gqcc/loss.hpp"
#include "gqcc/monte_carlo.hpp"

namespace gqcc {

struct DataSource {
    std::filesystem::path path;
    std::vector<std::string> covariates;   // empty: every column but the response
    std::string response = "y";
};

struct SimulateSettings {
    std::vector<CorridorMethod> methods{CorridorMethod::asymptotic, CorridorMethod::bootstrap};
    std::vector<double> sigma0s{0.5};
    std::vector<std::size_t> ns{100};
    std::vector<VarianceMode> modes{VarianceMode::homogeneous};
    std::size_t replicates = 200;
    // Both methods x sigma0 {0.2, 0.5, 0.7} x n {100, 300, 500} x tau {0.5, 0.2, 0.8} x both modes.
    bool full_matrix = false;
    // R = 2000, B = 10000. Hours of CPU.
    bool full_scale = false;
};

/// Everything a command needs. Built from a JSON file and/or flags, then
/// validated before any computation.
struct RunConfig {
    Family family = Family::quantile;
    std::vector<double> taus{0.5};
    double alpha = 0.05;
    CorridorMethod method = CorridorMethod::asymptotic;
    // One axis is broadcast to every covariate.
    std::vector<Axis> grid;
    BandwidthOptions bandwidth;
    // Unset: 1 everywhere except in group comparisons, where tail levels widen.
    std::optional<double> level_inflation;
    BootstrapConfig bootstrap{1000, 0, CenterMode::analytic, std::nullopt};
    std::optional<std::uint64_t> bootstrap_seed;
    std::uint64_t seed = 0;
    bool volume_normalization = false;
    bool plot_script = false;
    DataSource data;
    std::optional<DataSource> treatment;
    std::filesystem::path out = "out";
    SimulateSettings simulate;

    /// @throws ConfigError on the first invalid setting.
    void validate() const;
    [[nodiscard]] GridSpec grid_for(std::size_t dim) const;
    [[nodiscard]] BootstrapConfig bootstrap_config() const;
    [[nodiscard]] nlohmann::json to_json() const;
};

// Starting point for the simulate command: study bandwidth rule, B = 500, fixed seed.
RunConfig simulate_defaults();

/// Applies a JSON document on top of `base`. Unknown keys are rejected.
/// @throws ConfigError
RunConfig apply_config_json(RunConfig base, const nlohmann::json& j);
RunConfig load_config(const std::filesystem::path& path, RunConfig base = {});

/// "lo:hi:count"
Axis parse_axis(const std::string& text);

// Group-comparison default: x1.7 at tau in {0.1, 0.9}, x1.3 at {0.2, 0.3, 0.7, 0.8}.
double default_level_inflation(double tau);

}  // namespace gqcc
