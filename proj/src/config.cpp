#include "gqcc/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "gqcc/errors.hpp"

namespace gqcc {
namespace {

using nlohmann::json;

void check_keys(const json& j, const std::string& where, const std::set<std::string>& allowed) {
    if (!j.is_object()) throw ConfigError(where + " must be an object");
    for (const auto& [key, value] : j.items())
        if (!allowed.contains(key)) throw ConfigError("unknown configuration key '" + where + key + "'");
}

template <class T>
T get(const json& j, const std::string& key) {
    try {
        return j.get<T>();
    } catch (const json::exception& e) {
        throw ConfigError("configuration key '" + key + "' has the wrong type");
    }
}

template <class T>
std::vector<T> get_list(const json& j, const std::string& key) {
    if (j.is_array()) return get<std::vector<T>>(j, key);
    return {get<T>(j, key)};
}

Axis axis_from_json(const json& j, const std::string& key) {
    if (j.is_string()) return parse_axis(j.get<std::string>());
    check_keys(j, key + ".", {"lo", "hi", "count"});
    Axis a;
    if (j.contains("lo")) a.lo = get<double>(j["lo"], key + ".lo");
    if (j.contains("hi")) a.hi = get<double>(j["hi"], key + ".hi");
    if (j.contains("count")) a.count = get<std::size_t>(j["count"], key + ".count");
    return a;
}

DataSource source_from_json(const json& j, const std::string& key, DataSource base) {
    check_keys(j, key + ".", {"path", "covariates", "response"});
    if (j.contains("path")) base.path = get<std::string>(j["path"], key + ".path");
    if (j.contains("covariates")) base.covariates = get_list<std::string>(j["covariates"], key + ".covariates");
    if (j.contains("response")) base.response = get<std::string>(j["response"], key + ".response");
    return base;
}

json source_to_json(const DataSource& s) {
    return {{"path", s.path.string()}, {"covariates", s.covariates}, {"response", s.response}};
}

}  // namespace

Axis parse_axis(const std::string& text) {
    std::istringstream is(text);
    is.imbue(std::locale::classic());
    Axis a;
    char c1 = 0;
    char c2 = 0;
    if (!(is >> a.lo >> c1 >> a.hi >> c2 >> a.count) || c1 != ':' || c2 != ':' || !is.eof())
        throw ConfigError("grid axis '" + text + "' is not of the form lo:hi:count");
    return a;
}

double default_level_inflation(double tau) {
    auto near = [tau](double v) { return std::abs(tau - v) < 1e-9; };
    if (near(0.1) || near(0.9)) return 1.7;
    if (near(0.2) || near(0.3) || near(0.7) || near(0.8)) return 1.3;
    return 1.0;
}

RunConfig simulate_defaults() {
    RunConfig c;
    const StudyConfig study;
    c.bandwidth = study.bandwidth;
    c.bootstrap = study.bootstrap;
    c.seed = study.seed;
    return c;
}

void RunConfig::validate() const {
    if (taus.empty()) throw ConfigError("at least one tau is required");
    for (double t : taus) TaskSpec{family, t}.validate();
    if (family == Family::mean && taus.size() > 1) throw ConfigError("the mean family takes no tau list");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
    for (const auto& a : grid) {
        if (!(a.lo < a.hi)) throw ConfigError("grid axis needs lo < hi");
        if (a.count < 2) throw ConfigError("grid axis needs at least 2 points");
    }
    if (bandwidth.mode == BandwidthMode::manual && bandwidth.manual_h.empty())
        throw ConfigError("bandwidth.mode = manual needs bandwidth.h");
    for (double h : bandwidth.manual_h)
        if (!(h > 0.0)) throw ConfigError("bandwidth.h values must be positive");
    if (bandwidth.delta < 0.0) throw ConfigError("bandwidth.delta must be non-negative");
    if (!(bandwidth.h1_inflation >= 1.0)) throw ConfigError("bandwidth.h1_inflation must be >= 1");
    if (level_inflation && !(*level_inflation > 0.0)) throw ConfigError("bandwidth.level_inflation must be positive");
    bootstrap.validate();
    if (bootstrap.variant == BootstrapVariant::quantile_ratio && family != Family::quantile)
        throw ConfigError("bootstrap.variant = quantile-ratio needs the quantile family");
    if (simulate.replicates < 50) throw ConfigError("simulate.replicates must be at least 50");
    for (double s : simulate.sigma0s)
        if (!(s > 0.0)) throw ConfigError("simulate.sigma0 values must be positive");
    for (auto n : simulate.ns)
        if (n < 10) throw ConfigError("simulate.n values must be at least 10");
    if (simulate.methods.empty() || simulate.sigma0s.empty() || simulate.ns.empty() || simulate.modes.empty())
        throw ConfigError("simulate lists must not be empty");
}

GridSpec RunConfig::grid_for(std::size_t dim) const {
    if (grid.empty()) return GridSpec::standard(dim);
    if (grid.size() == 1) return GridSpec(std::vector<Axis>(dim, grid.front()));
    if (grid.size() != dim)
        throw ConfigError("grid has " + std::to_string(grid.size()) + " axes but the data have " + std::to_string(dim) +
                          " covariates");
    return GridSpec(grid);
}

BootstrapConfig RunConfig::bootstrap_config() const {
    auto b = bootstrap;
    b.seed = bootstrap_seed.value_or(seed);
    return b;
}

json RunConfig::to_json() const {
    json j;
    j["family"] = std::string(to_string(family));
    j["tau"] = taus;
    j["alpha"] = alpha;
    j["method"] = std::string(to_string(method));
    auto axes = json::array();
    for (const auto& a : grid) axes.push_back({{"lo", a.lo}, {"hi", a.hi}, {"count", a.count}});
    j["grid"] = axes;
    json bw;
    bw["mode"] = bandwidth.mode == BandwidthMode::automatic ? "auto" : "manual";
    bw["h"] = bandwidth.manual_h;
    bw["pilot"] = std::string(to_string(bandwidth.pilot));
    bw["delta"] = bandwidth.delta;
    bw["h1_inflation"] = bandwidth.h1_inflation;
    bw["min_neighbors"] = bandwidth.min_neighbors;
    bw["yu_jones"] = bandwidth.yu_jones ? json(*bandwidth.yu_jones) : json("auto");
    bw["level_inflation"] = level_inflation ? json(*level_inflation) : json("auto");
    j["bandwidth"] = bw;
    j["bootstrap"] = {{"B", bootstrap.B},
                      {"seed", bootstrap_seed.value_or(seed)},
                      {"variant", bootstrap.variant ? json(std::string(to_string(*bootstrap.variant))) : json("auto")},
                      {"center_mode", std::string(to_string(bootstrap.center))}};
    j["seed"] = seed;
    j["volume_normalization"] = volume_normalization;
    j["plot_script"] = plot_script;
    j["data"] = source_to_json(data);
    if (treatment) j["treatment"] = source_to_json(*treatment);
    j["out"] = out.string();
    std::vector<std::string> methods;
    for (auto m : simulate.methods) methods.emplace_back(to_string(m));
    std::vector<std::string> modes;
    for (auto m : simulate.modes) modes.emplace_back(to_string(m));
    j["simulate"] = {{"methods", methods},     {"sigma0", simulate.sigma0s},
                     {"n", simulate.ns},       {"modes", modes},
                     {"replicates", simulate.replicates}, {"full_matrix", simulate.full_matrix},
                     {"full_scale", simulate.full_scale}};
    return j;
}

RunConfig apply_config_json(RunConfig c, const json& j) {
    check_keys(j, "", {"family", "tau", "alpha", "method", "grid", "bandwidth", "bootstrap", "seed",
                       "volume_normalization", "plot_script", "data", "treatment", "out", "simulate"});
    if (j.contains("family")) c.family = parse_family(get<std::string>(j["family"], "family"));
    if (j.contains("tau")) c.taus = get_list<double>(j["tau"], "tau");
    if (j.contains("alpha")) c.alpha = get<double>(j["alpha"], "alpha");
    if (j.contains("method")) c.method = parse_method(get<std::string>(j["method"], "method"));
    if (j.contains("grid")) {
        c.grid.clear();
        if (j["grid"].is_array())
            for (const auto& a : j["grid"]) c.grid.push_back(axis_from_json(a, "grid"));
        else
            c.grid.push_back(axis_from_json(j["grid"], "grid"));
    }
    if (j.contains("bandwidth")) {
        const auto& b = j["bandwidth"];
        check_keys(b, "bandwidth.",
                   {"mode", "h", "pilot", "delta", "h1_inflation", "min_neighbors", "yu_jones", "level_inflation"});
        if (b.contains("mode")) {
            const auto m = get<std::string>(b["mode"], "bandwidth.mode");
            if (m == "auto")
                c.bandwidth.mode = BandwidthMode::automatic;
            else if (m == "manual")
                c.bandwidth.mode = BandwidthMode::manual;
            else
                throw ConfigError("bandwidth.mode must be auto or manual");
        }
        if (b.contains("h")) c.bandwidth.manual_h = get_list<double>(b["h"], "bandwidth.h");
        if (b.contains("pilot")) c.bandwidth.pilot = parse_pilot_rule(get<std::string>(b["pilot"], "bandwidth.pilot"));
        if (b.contains("delta")) c.bandwidth.delta = get<double>(b["delta"], "bandwidth.delta");
        if (b.contains("h1_inflation")) c.bandwidth.h1_inflation = get<double>(b["h1_inflation"], "bandwidth.h1_inflation");
        if (b.contains("min_neighbors"))
            c.bandwidth.min_neighbors = get<std::size_t>(b["min_neighbors"], "bandwidth.min_neighbors");
        if (b.contains("yu_jones")) {
            if (b["yu_jones"].is_string() && b["yu_jones"] == "auto")
                c.bandwidth.yu_jones.reset();
            else
                c.bandwidth.yu_jones = get<bool>(b["yu_jones"], "bandwidth.yu_jones");
        }
        if (b.contains("level_inflation")) {
            if (b["level_inflation"].is_string() && b["level_inflation"] == "auto")
                c.level_inflation.reset();
            else
                c.level_inflation = get<double>(b["level_inflation"], "bandwidth.level_inflation");
        }
    }
    if (j.contains("bootstrap")) {
        const auto& b = j["bootstrap"];
        check_keys(b, "bootstrap.", {"B", "seed", "variant", "center_mode"});
        if (b.contains("B")) c.bootstrap.B = get<std::size_t>(b["B"], "bootstrap.B");
        if (b.contains("seed")) c.bootstrap_seed = get<std::uint64_t>(b["seed"], "bootstrap.seed");
        if (b.contains("variant")) {
            const auto v = get<std::string>(b["variant"], "bootstrap.variant");
            if (v == "auto")
                c.bootstrap.variant.reset();
            else
                c.bootstrap.variant = parse_variant(v);
        }
        if (b.contains("center_mode"))
            c.bootstrap.center = parse_center_mode(get<std::string>(b["center_mode"], "bootstrap.center_mode"));
    }
    if (j.contains("seed")) c.seed = get<std::uint64_t>(j["seed"], "seed");
    if (j.contains("volume_normalization"))
        c.volume_normalization = get<bool>(j["volume_normalization"], "volume_normalization");
    if (j.contains("plot_script")) c.plot_script = get<bool>(j["plot_script"], "plot_script");
    if (j.contains("data")) c.data = source_from_json(j["data"], "data", c.data);
    if (j.contains("treatment")) c.treatment = source_from_json(j["treatment"], "treatment", c.treatment.value_or(DataSource{}));
    if (j.contains("out")) c.out = get<std::string>(j["out"], "out");
    if (j.contains("simulate")) {
        const auto& s = j["simulate"];
        check_keys(s, "simulate.", {"methods", "sigma0", "n", "modes", "replicates", "full_matrix", "full_scale"});
        if (s.contains("methods")) {
            c.simulate.methods.clear();
            for (const auto& m : get_list<std::string>(s["methods"], "simulate.methods"))
                c.simulate.methods.push_back(parse_method(m));
        }
        if (s.contains("sigma0")) c.simulate.sigma0s = get_list<double>(s["sigma0"], "simulate.sigma0");
        if (s.contains("n")) c.simulate.ns = get_list<std::size_t>(s["n"], "simulate.n");
        if (s.contains("modes")) {
            c.simulate.modes.clear();
            for (const auto& m : get_list<std::string>(s["modes"], "simulate.modes"))
                c.simulate.modes.push_back(parse_variance_mode(m));
        }
        if (s.contains("replicates")) c.simulate.replicates = get<std::size_t>(s["replicates"], "simulate.replicates");
        if (s.contains("full_matrix")) c.simulate.full_matrix = get<bool>(s["full_matrix"], "simulate.full_matrix");
        if (s.contains("full_scale")) c.simulate.full_scale = get<bool>(s["full_scale"], "simulate.full_scale");
    }
    return c;
}

RunConfig load_config(const std::filesystem::path& path, RunConfig base) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open configuration file " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    return apply_config_json(std::move(base), j);
}

}  // namespace gqcc
