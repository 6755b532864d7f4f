#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "gqcc/config.hpp"
#include "gqcc/corridor.hpp"
#include "gqcc/pipeline.hpp"

namespace gqcc {

struct CommandResult {
    std::vector<std::filesystem::path> written;
    std::string summary;   // human-readable, for stdout
};

CommandResult cmd_fit(const RunConfig& config);
CommandResult cmd_cc(const RunConfig& config);
CommandResult cmd_compare(const RunConfig& config);
// `log` receives progress lines (may be null).
CommandResult cmd_simulate(const RunConfig& config, std::ostream* log = nullptr);

/// Intersection of both covariate ranges, trimmed by `trim` of its width on
/// each side, `count` points per axis.
/// @throws DataError when the ranges do not overlap on some axis.
GridSpec common_grid(const Dataset& control, const Dataset& treatment, std::size_t count = 20, double trim = 0.1);

struct GroupComparison {
    Corridor control;     // group 0
    Corridor treatment;   // group 1
    std::vector<std::uint8_t> above;     // theta_hat_1 > upper_0
    std::vector<std::uint8_t> below;     // theta_hat_1 < lower_0
    std::vector<std::uint8_t> overlap;   // the two corridors intersect

    [[nodiscard]] std::size_t count_above() const;
    [[nodiscard]] std::size_t count_below() const;
    [[nodiscard]] std::size_t count_overlap() const;
};

// Both groups are analysed on options.grid. Group g bootstraps with seed
// Stream(boot seed, {g}).
GroupComparison compare_groups(const Dataset& control, const Dataset& treatment, const TaskSpec& spec,
                               const AnalysisOptions& analysis, const CorridorOptions& corridor);

std::string exceedance_summary(const GroupComparison& cmp);

// "tau0.5", or "mean" for the mean family.
std::string level_tag(const TaskSpec& spec);

}  // namespace gqcc
