#include "gqcc/commands.hpp"

#include <algorithm>
#include <charconv>
#include <ostream>
#include <sstream>

#include "gqcc/errors.hpp"
#include "gqcc/io.hpp"
#include "gqcc/rng.hpp"
#include "gqcc/stats.hpp"

namespace gqcc {
namespace {

using nlohmann::json;

struct LoadedData {
    Dataset data;
    std::vector<std::string> covariates;
};

LoadedData load(const DataSource& src) {
    if (src.path.empty()) throw ConfigError("no input data path given");
    const auto table = read_csv(src.path);
    LoadedData out;
    out.data = select_dataset(table, src.covariates, src.response);
    out.covariates = src.covariates;
    if (out.covariates.empty())
        for (const auto& name : table.header)
            if (name != src.response) out.covariates.push_back(name);
    return out;
}

std::vector<TaskSpec> specs_of(const RunConfig& c) {
    if (c.family == Family::mean) return {TaskSpec{Family::mean, 0.5}};
    std::vector<TaskSpec> out;
    for (double t : c.taus) out.push_back(TaskSpec{c.family, t});
    return out;
}

AnalysisOptions analysis_options(const RunConfig& c, const GridSpec& grid, double level_inflation) {
    AnalysisOptions ao;
    ao.grid = grid;
    ao.bandwidth = c.bandwidth;
    ao.bandwidth.level_inflation = level_inflation;
    return ao;
}

CorridorOptions corridor_options(const RunConfig& c) {
    CorridorOptions co;
    co.method = c.method;
    co.alpha = c.alpha;
    co.volume_normalization = c.volume_normalization;
    co.bootstrap = c.bootstrap_config();
    return co;
}

json plan_json(const BandwidthPlan& p) {
    return {{"h", p.h}, {"kappa", p.kappa}, {"h0", p.h0}, {"hbar", p.hbar}, {"h1", p.h1},
            {"delta", p.delta}, {"warnings", p.warnings}};
}

json header_json(const std::string& command, const RunConfig& c) {
    json j;
    j["tool"] = {{"name", "gqcc"}, {"version", std::string(kToolVersion)}};
    j["command"] = command;
    j["config"] = c.to_json();
    return j;
}

json data_json(const DataSource& src, const LoadedData& d) {
    return {{"path", src.path.string()}, {"rows", d.data.size()}, {"covariates", d.covariates},
            {"response", src.response}};
}

std::string gnuplot_script(const std::string& csv, const Corridor& cc, const std::vector<std::string>& names) {
    std::ostringstream os;
    os << "set datafile separator ','\nset key autotitle columnhead\n";
    if (cc.grid.dim() == 1) {
        os << "set xlabel '" << names[0] << "'\n"
           << "plot '" << csv << "' using 1:3:4 with filledcurves fs transparent solid 0.3 title 'corridor', \\\n"
           << "     '' using 1:2 with lines lw 2 title 'estimate'\n";
    } else if (cc.grid.dim() == 2) {
        os << "set xlabel '" << names[0] << "'\nset ylabel '" << names[1] << "'\n"
           << "set dgrid3d " << cc.grid.axis(0).count << "," << cc.grid.axis(1).count << "\nset hidden3d\n"
           << "splot '" << csv << "' using 1:2:4 with lines title 'lower', \\\n"
           << "      '' using 1:2:3 with lines title 'estimate', \\\n"
           << "      '' using 1:2:5 with lines title 'upper'\n";
    } else {
        os << "# no default view for " << cc.grid.dim() << " covariates; columns are coordinates, theta_hat, lower, upper\n";
    }
    return os.str();
}

}  // namespace

std::string level_tag(const TaskSpec& spec) {
    if (spec.family == Family::mean) return "mean";
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, spec.tau);
    return "tau" + std::string(buf, r.ptr);
}

CommandResult cmd_fit(const RunConfig& config) {
    config.validate();
    const auto in = load(config.data);
    const auto grid = config.grid_for(in.data.dim());
    CommandResult res;
    auto meta = header_json("fit", config);
    meta["data"] = data_json(config.data, in);
    meta["grid"] = grid_json(grid);
    meta["results"] = json::array();
    for (const auto& spec : specs_of(config)) {
        auto ao = analysis_options(config, grid, config.level_inflation.value_or(1.0));
        ao.nuisance = false;
        const auto a = analyze(in.data, spec, ao);
        const auto path = config.out / ("fit_" + level_tag(spec) + ".csv");
        write_file_atomic(path, fit_csv(a.fit, in.covariates));
        res.written.push_back(path);
        meta["results"].push_back({{"family", std::string(to_string(spec.family))},
                                   {"tau", spec.tau},
                                   {"file", path.filename().string()},
                                   {"bandwidth", plan_json(a.plan)}});
        res.summary += "fit " + level_tag(spec) + " -> " + path.string() + "\n";
    }
    const auto mpath = config.out / "fit_metadata.json";
    write_file_atomic(mpath, dump_json(meta));
    res.written.push_back(mpath);
    return res;
}

CommandResult cmd_cc(const RunConfig& config) {
    config.validate();
    const auto in = load(config.data);
    const auto grid = config.grid_for(in.data.dim());
    const auto co = corridor_options(config);
    const std::string method(to_string(config.method));
    CommandResult res;
    auto meta = header_json("cc", config);
    meta["data"] = data_json(config.data, in);
    meta["results"] = json::array();
    for (const auto& spec : specs_of(config)) {
        const auto a = analyze(in.data, spec, analysis_options(config, grid, config.level_inflation.value_or(1.0)));
        const auto cc = build_corridor(in.data, a, co);
        const auto stem = "cc_" + method + "_" + level_tag(spec);
        const auto path = config.out / (stem + ".csv");
        write_file_atomic(path, corridor_csv(cc, in.covariates));
        res.written.push_back(path);
        auto entry = corridor_metadata(cc);
        entry["file"] = path.filename().string();
        entry["bandwidth"] = plan_json(a.plan);
        meta["results"].push_back(entry);
        if (config.plot_script) {
            const auto gp = config.out / (stem + ".gp");
            write_file_atomic(gp, gnuplot_script(path.filename().string(), cc, in.covariates));
            res.written.push_back(gp);
        }
        std::ostringstream os;
        os << method << " corridor " << level_tag(spec) << ": mean width " << corridor_volume(cc) << " -> "
           << path.string() << "\n";
        res.summary += os.str();
    }
    const auto mpath = config.out / ("cc_" + method + "_metadata.json");
    write_file_atomic(mpath, dump_json(meta));
    res.written.push_back(mpath);
    return res;
}

GridSpec common_grid(const Dataset& control, const Dataset& treatment, std::size_t count, double trim) {
    if (control.dim() != treatment.dim())
        throw DataError("the two groups have different numbers of covariates");
    std::vector<Axis> axes;
    for (std::size_t j = 0; j < control.dim(); ++j) {
        const auto a = control.column(j);
        const auto b = treatment.column(j);
        const auto [a_lo, a_hi] = std::minmax_element(a.begin(), a.end());
        const auto [b_lo, b_hi] = std::minmax_element(b.begin(), b.end());
        const double lo = std::max(*a_lo, *b_lo);
        const double hi = std::min(*a_hi, *b_hi);
        if (!(lo < hi))
            throw DataError("covariate " + std::to_string(j + 1) + " ranges of the two groups do not overlap");
        const double w = hi - lo;
        axes.push_back(Axis{lo + trim * w, hi - trim * w, count});
    }
    return GridSpec(std::move(axes));
}

std::size_t GroupComparison::count_above() const { return static_cast<std::size_t>(std::count(above.begin(), above.end(), 1)); }
std::size_t GroupComparison::count_below() const { return static_cast<std::size_t>(std::count(below.begin(), below.end(), 1)); }
std::size_t GroupComparison::count_overlap() const {
    return static_cast<std::size_t>(std::count(overlap.begin(), overlap.end(), 1));
}

GroupComparison compare_groups(const Dataset& control, const Dataset& treatment, const TaskSpec& spec,
                               const AnalysisOptions& analysis, const CorridorOptions& corridor) {
    GroupComparison out;
    const Dataset* groups[2] = {&control, &treatment};
    Corridor* targets[2] = {&out.control, &out.treatment};
    for (std::uint64_t g = 0; g < 2; ++g) {
        const auto a = analyze(*groups[g], spec, analysis);
        auto co = corridor;
        co.bootstrap.seed = Stream(corridor.bootstrap.seed, {g}).key();
        *targets[g] = build_corridor(*groups[g], a, co);
    }
    const auto m = analysis.grid.size();
    out.above.assign(m, 0);
    out.below.assign(m, 0);
    out.overlap.assign(m, 0);
    const auto& c0 = out.control;
    const auto& c1 = out.treatment;
    for (std::size_t k = 0; k < m; ++k) {
        out.above[k] = c1.theta_hat[k] > c0.upper[k];
        out.below[k] = c1.theta_hat[k] < c0.lower[k];
        out.overlap[k] = c1.lower[k] <= c0.upper[k] && c0.lower[k] <= c1.upper[k];
    }
    return out;
}

std::string exceedance_summary(const GroupComparison& cmp) {
    const auto m = cmp.above.size();
    const auto tag = level_tag(cmp.control.meta.spec);
    std::ostringstream os;
    os << tag << ": theta_hat_1 exceeds upper CC of group 0 on " << cmp.count_above() << " of " << m << " nodes; "
       << "falls below lower CC of group 0 on " << cmp.count_below() << " of " << m << " nodes; "
       << "corridors overlap on " << cmp.count_overlap() << " of " << m << " nodes\n";
    return os.str();
}

CommandResult cmd_compare(const RunConfig& config) {
    config.validate();
    if (!config.treatment) throw ConfigError("compare needs a treatment data set");
    const auto g0 = load(config.data);
    const auto g1 = load(*config.treatment);
    if (g0.covariates != g1.covariates) throw DataError("the two groups have different covariate columns");
    const auto grid = config.grid.empty() ? common_grid(g0.data, g1.data) : config.grid_for(g0.data.dim());
    const auto co = corridor_options(config);

    CommandResult res;
    auto meta = header_json("compare", config);
    meta["control"] = data_json(config.data, g0);
    meta["treatment"] = data_json(*config.treatment, g1);
    meta["grid"] = grid_json(grid);
    const double d = ks_two_sample(g0.data.y_data(), g1.data.y_data());
    const double n_eff = static_cast<double>(g0.data.size() * g1.data.size()) /
                         static_cast<double>(g0.data.size() + g1.data.size());
    const double p = kolmogorov_pvalue(d, n_eff);
    meta["response_ks"] = {{"statistic", d}, {"p_value", p}};
    meta["results"] = json::array();
    std::ostringstream summary;
    summary.imbue(std::locale::classic());
    summary << "two-sample KS on responses: D = " << format_double(d) << ", p = " << format_double(p) << "\n";

    for (const auto& spec : specs_of(config)) {
        const double infl = config.level_inflation.value_or(default_level_inflation(spec.tau));
        const auto cmp = compare_groups(g0.data, g1.data, spec, analysis_options(config, grid, infl), co);
        const auto tag = level_tag(spec);
        const Corridor* cs[2] = {&cmp.control, &cmp.treatment};
        json entry;
        entry["tau"] = spec.tau;
        entry["level_inflation"] = infl;
        for (int g = 0; g < 2; ++g) {
            const auto path = config.out / ("group" + std::to_string(g) + "_cc_" + tag + ".csv");
            write_file_atomic(path, corridor_csv(*cs[g], g0.covariates));
            res.written.push_back(path);
            auto cm = corridor_metadata(*cs[g]);
            cm["file"] = path.filename().string();
            entry["group" + std::to_string(g)] = cm;
        }
        std::ostringstream csv;
        csv.imbue(std::locale::classic());
        for (const auto& name : g0.covariates) csv << name << ',';
        csv << "theta_hat_0,lower_0,upper_0,theta_hat_1,lower_1,upper_1,above,below,overlap\n";
        std::vector<double> pt(grid.dim());
        json above_nodes = json::array();
        json below_nodes = json::array();
        for (std::size_t k = 0; k < grid.size(); ++k) {
            grid.point(k, pt);
            for (double v : pt) csv << format_double(v) << ',';
            csv << format_double(cmp.control.theta_hat[k]) << ',' << format_double(cmp.control.lower[k]) << ','
                << format_double(cmp.control.upper[k]) << ',' << format_double(cmp.treatment.theta_hat[k]) << ','
                << format_double(cmp.treatment.lower[k]) << ',' << format_double(cmp.treatment.upper[k]) << ','
                << int(cmp.above[k]) << ',' << int(cmp.below[k]) << ',' << int(cmp.overlap[k]) << '\n';
            if (cmp.above[k]) above_nodes.push_back(pt);
            if (cmp.below[k]) below_nodes.push_back(pt);
        }
        const auto path = config.out / ("compare_" + tag + ".csv");
        write_file_atomic(path, csv.str());
        res.written.push_back(path);
        entry["file"] = path.filename().string();
        entry["exceedance"] = {{"above", cmp.count_above()}, {"below", cmp.count_below()},
                               {"overlap", cmp.count_overlap()}, {"nodes", grid.size()},
                               {"above_nodes", above_nodes}, {"below_nodes", below_nodes}};
        meta["results"].push_back(entry);
        summary << exceedance_summary(cmp);
    }
    const auto spath = config.out / "compare_summary.txt";
    write_file_atomic(spath, summary.str());
    res.written.push_back(spath);
    const auto mpath = config.out / "compare_metadata.json";
    write_file_atomic(mpath, dump_json(meta));
    res.written.push_back(mpath);
    res.summary = summary.str();
    return res;
}

CommandResult cmd_simulate(const RunConfig& config, std::ostream* log) {
    config.validate();
    auto s = config.simulate;
    auto taus = config.family == Family::mean ? std::vector<double>{0.5} : config.taus;
    if (s.full_matrix) {
        s.methods = {CorridorMethod::asymptotic, CorridorMethod::bootstrap};
        s.sigma0s = {0.2, 0.5, 0.7};
        s.ns = {100, 300, 500};
        s.modes = {VarianceMode::homogeneous, VarianceMode::heterogeneous};
        if (config.family != Family::mean) taus = {0.5, 0.2, 0.8};
    }
    StudyConfig sc;
    sc.replicates = s.full_scale ? 2000 : s.replicates;
    sc.seed = config.seed;
    sc.alpha = config.alpha;
    if (!config.grid.empty()) sc.grid = config.grid_for(2);
    sc.bootstrap = config.bootstrap_config();
    if (s.full_scale) sc.bootstrap.B = 10000;
    sc.bandwidth = config.bandwidth;
    sc.bandwidth.level_inflation = config.level_inflation.value_or(1.0);
    sc.volume_normalization = config.volume_normalization;
    const auto cells = table_cells(config.family, s.methods, s.sigma0s, s.ns, taus, s.modes);
    if (log) *log << "simulating " << cells.size() << " cells, R = " << sc.replicates << "\n";

    const auto results = coverage_study(cells, sc);
    CommandResult res;
    const auto cpath = config.out / "coverage.csv";
    write_file_atomic(cpath, report_csv(results));
    const auto tpath = config.out / "coverage_table.txt";
    const auto table = report_table(results);
    write_file_atomic(tpath, table);
    auto meta = header_json("simulate", config);
    meta["cells"] = cells.size();
    meta["failures"] = json::array();
    for (const auto& r : results)
        meta["failures"].push_back({{"cell", cell_label(r.cell)}, {"count", r.failures}, {"first", r.failure_messages}});
    const auto mpath = config.out / "simulate_metadata.json";
    write_file_atomic(mpath, dump_json(meta));
    res.written = {cpath, tpath, mpath};
    res.summary = table;
    return res;
}

}  // namespace gqcc
