// gqcc: local generalized quantile regression and confidence corridors.
#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gqcc/commands.hpp"
#include "gqcc/config.hpp"
#include "gqcc/errors.hpp"
#include "gqcc/io.hpp"

namespace {

using namespace gqcc;

// Raw flag values; unset ones leave the config file (or defaults) alone.
struct Flags {
    std::string config;
    std::optional<std::string> family;
    std::vector<double> taus;
    std::optional<double> alpha;
    std::optional<std::string> method;
    std::vector<std::string> grid;
    std::optional<std::string> bandwidth;
    std::optional<std::string> pilot;
    std::optional<double> delta;
    std::optional<std::size_t> min_neighbors;
    std::optional<std::size_t> boot_b;
    std::optional<std::string> boot_variant;
    std::optional<std::string> center_mode;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<std::string> data;
    std::optional<std::string> treatment;
    std::vector<std::string> covariates;
    std::optional<std::string> response;
    bool plot = false;
    bool volume_normalization = false;
    // simulate
    std::vector<std::size_t> ns;
    std::vector<double> sigma0s;
    std::vector<std::string> modes;
    std::vector<std::string> methods;
    std::optional<std::size_t> replicates;
    bool full_matrix = false;
    bool full_scale = false;
};

void add_common(CLI::App* sub, Flags& f) {
    sub->add_option("--config", f.config, "JSON configuration file; flags override it");
    sub->add_option("--family", f.family, "quantile | expectile | mean");
    sub->add_option("--tau", f.taus, "level(s); repeat or comma-separate")->delimiter(',');
    sub->add_option("--alpha", f.alpha, "1 - nominal coverage");
    sub->add_option("--grid", f.grid, "axis lo:hi:count; one value is used for every covariate");
    sub->add_option("--bandwidth", f.bandwidth, "auto, or manual pilot h (comma list per covariate)");
    sub->add_option("--pilot", f.pilot, "regression | conditional-density reference rule");
    sub->add_option("--delta", f.delta, "undersmoothing exponent");
    sub->add_option("--min-neighbors", f.min_neighbors, "widen h until every node sees this many points");
    sub->add_option("--seed", f.seed, "master seed");
    sub->add_option("--out", f.out, "output directory");
    sub->add_flag("--volume-normalization", f.volume_normalization, "include log vol(D) in the Gumbel constants");
}

void add_corridor(CLI::App* sub, Flags& f) {
    sub->add_option("--boot-B", f.boot_b, "bootstrap replicates (>= 100)");
    sub->add_option("--boot-variant", f.boot_variant, "standard | quantile-ratio");
    sub->add_option("--center-mode", f.center_mode, "analytic | empirical-mean");
}

void add_data(CLI::App* sub, Flags& f, const char* name) {
    sub->add_option(name, f.data, "input CSV with a header row");
    sub->add_option("--covariates", f.covariates, "covariate columns (default: all but the response)")->delimiter(',');
    sub->add_option("--response", f.response, "response column (default y)");
}

RunConfig build_config(const Flags& f, RunConfig base) {
    RunConfig c = f.config.empty() ? std::move(base) : load_config(f.config, std::move(base));
    if (f.family) c.family = parse_family(*f.family);
    if (!f.taus.empty()) c.taus = f.taus;
    if (f.alpha) c.alpha = *f.alpha;
    if (f.method) c.method = parse_method(*f.method);
    if (!f.grid.empty()) {
        c.grid.clear();
        for (const auto& g : f.grid) c.grid.push_back(parse_axis(g));
    }
    if (f.bandwidth) {
        if (*f.bandwidth == "auto") {
            c.bandwidth.mode = BandwidthMode::automatic;
            c.bandwidth.manual_h.clear();
        } else {
            c.bandwidth.mode = BandwidthMode::manual;
            c.bandwidth.manual_h.clear();
            std::stringstream ss(*f.bandwidth);
            for (std::string tok; std::getline(ss, tok, ',');) {
                try {
                    std::size_t used = 0;
                    c.bandwidth.manual_h.push_back(std::stod(tok, &used));
                    if (used != tok.size()) throw std::invalid_argument(tok);
                } catch (const std::exception&) {
                    throw ConfigError("--bandwidth expects auto or numbers, got '" + *f.bandwidth + "'");
                }
            }
        }
    }
    if (f.pilot) c.bandwidth.pilot = parse_pilot_rule(*f.pilot);
    if (f.delta) c.bandwidth.delta = *f.delta;
    if (f.min_neighbors) c.bandwidth.min_neighbors = *f.min_neighbors;
    if (f.boot_b) c.bootstrap.B = *f.boot_b;
    if (f.boot_variant) c.bootstrap.variant = parse_variant(*f.boot_variant);
    if (f.center_mode) c.bootstrap.center = parse_center_mode(*f.center_mode);
    if (f.seed) c.seed = *f.seed;
    if (f.out) c.out = *f.out;
    if (f.data) c.data.path = *f.data;
    if (f.treatment) {
        if (!c.treatment) c.treatment = c.data;
        c.treatment->path = *f.treatment;
    }
    if (!f.covariates.empty()) {
        c.data.covariates = f.covariates;
        if (c.treatment) c.treatment->covariates = f.covariates;
    }
    if (f.response) {
        c.data.response = *f.response;
        if (c.treatment) c.treatment->response = *f.response;
    }
    if (f.plot) c.plot_script = true;
    if (f.volume_normalization) c.volume_normalization = true;
    if (!f.ns.empty()) c.simulate.ns = f.ns;
    if (!f.sigma0s.empty()) c.simulate.sigma0s = f.sigma0s;
    if (!f.modes.empty()) {
        c.simulate.modes.clear();
        for (const auto& m : f.modes) c.simulate.modes.push_back(parse_variance_mode(m));
    }
    if (!f.methods.empty()) {
        c.simulate.methods.clear();
        for (const auto& m : f.methods) c.simulate.methods.push_back(parse_method(m));
    }
    if (f.replicates) c.simulate.replicates = *f.replicates;
    if (f.full_matrix) c.simulate.full_matrix = true;
    if (f.full_scale) c.simulate.full_scale = true;
    return c;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Confidence corridors for local quantile, expectile and mean regression"};
    app.set_version_flag("--version", std::string(gqcc::kToolVersion));
    app.require_subcommand(1);
    Flags f;

    auto* fit = app.add_subcommand("fit", "estimate the surface on a grid");
    add_common(fit, f);
    add_data(fit, f, "--data");

    auto* cc = app.add_subcommand("cc", "estimate and build a simultaneous confidence corridor");
    add_common(cc, f);
    add_data(cc, f, "--data");
    add_corridor(cc, f);
    cc->add_option("--method", f.method, "asymptotic | bootstrap");
    cc->add_flag("--plot", f.plot, "also write a gnuplot script per level");

    auto* cmp = app.add_subcommand("compare", "compare two groups through their corridors");
    add_common(cmp, f);
    add_data(cmp, f, "--control");
    add_corridor(cmp, f);
    cmp->add_option("--treatment", f.treatment, "CSV of the treatment group");
    cmp->add_option("--method", f.method, "asymptotic | bootstrap");

    auto* sim = app.add_subcommand("simulate", "Monte Carlo coverage study on the built-in design");
    add_common(sim, f);
    add_corridor(sim, f);
    sim->add_option("--n", f.ns, "sample size(s)")->delimiter(',');
    sim->add_option("--sigma0", f.sigma0s, "noise level(s)")->delimiter(',');
    sim->add_option("--mode", f.modes, "homogeneous | heterogeneous")->delimiter(',');
    sim->add_option("--method", f.methods, "asymptotic | bootstrap")->delimiter(',');
    sim->add_option("--replicates", f.replicates, "Monte Carlo replicates per cell (>= 50)");
    sim->add_flag("--full-matrix", f.full_matrix, "both methods x sigma0 {0.2,0.5,0.7} x n {100,300,500} x tau {0.5,0.2,0.8} x both modes");
    sim->add_flag("--full-scale", f.full_scale, "R = 2000, B = 10000 (very slow)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return static_cast<int>(ExitCode::config);
    }

    try {
        CommandResult res;
        if (sim->parsed()) {
            const auto config = build_config(f, simulate_defaults());
            if (config.simulate.full_scale)
                std::cerr << "warning: full scale runs 2000 replicates with B = 10000 per cell; expect many CPU hours\n";
            res = cmd_simulate(config, &std::cerr);
        } else {
            const auto config = build_config(f, RunConfig{});
            if (fit->parsed())
                res = cmd_fit(config);
            else if (cc->parsed())
                res = cmd_cc(config);
            else
                res = cmd_compare(config);
        }
        std::cout << res.summary;
        return 0;
    } catch (const gqcc::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return static_cast<int>(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return static_cast<int>(ExitCode::numerical);
    }
}
