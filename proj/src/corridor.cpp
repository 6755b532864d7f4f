#include "gqcc/corridor.hpp"

#include "gqcc/errors.hpp"

namespace gqcc {

std::string_view to_string(CorridorMethod m) {
    return m == CorridorMethod::asymptotic ? "asymptotic" : "bootstrap";
}

CorridorMethod parse_method(std::string_view name) {
    if (name == "asymptotic") return CorridorMethod::asymptotic;
    if (name == "bootstrap") return CorridorMethod::bootstrap;
    throw ConfigError("unknown corridor method '" + std::string(name) + "' (expected asymptotic or bootstrap)");
}

bool covers(const Corridor& corridor, const GridSpec& truth_grid, std::span<const double> truth) {
    if (!(truth_grid == corridor.grid)) throw ConfigError("truth surface is evaluated on a different grid");
    return covers(corridor, truth);
}

bool covers(const Corridor& corridor, std::span<const double> truth) {
    if (truth.size() != corridor.grid.size())
        throw ConfigError("truth surface has " + std::to_string(truth.size()) + " nodes, corridor has " +
                          std::to_string(corridor.grid.size()));
    for (std::size_t k = 0; k < truth.size(); ++k)
        if (!(corridor.lower[k] <= truth[k] && truth[k] <= corridor.upper[k])) return false;
    return true;
}

double corridor_volume(const Corridor& corridor) {
    if (corridor.lower.empty()) throw ConfigError("corridor volume of an empty grid");
    double s = 0.0;
    for (std::size_t k = 0; k < corridor.lower.size(); ++k) s += corridor.upper[k] - corridor.lower[k];
    return s / static_cast<double>(corridor.lower.size());
}

double corridor_volume_scaled(const Corridor& corridor) { return corridor_volume(corridor) * corridor.grid.volume(); }

}  // namespace gqcc
