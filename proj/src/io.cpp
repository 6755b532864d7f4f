#include "gqcc/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <cmath>
#include <system_error>

#include "gqcc/errors.hpp"

namespace gqcc {
namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

std::string where(const std::filesystem::path& source, std::size_t line) {
    return source.string() + ":" + std::to_string(line) + ": ";
}

}  // namespace

std::size_t CsvTable::column_index(std::string_view name) const {
    for (std::size_t j = 0; j < header.size(); ++j)
        if (header[j] == name) return j;
    throw DataError(source.string() + ": no column named '" + std::string(name) + "'");
}

CsvTable parse_csv(std::string_view text, const std::filesystem::path& source) {
    CsvTable t;
    t.source = source;
    std::size_t line_no = 0;
    bool have_header = false;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto eol = text.find('\n', pos);
        std::string_view line = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
        pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
        ++line_no;
        if (line_no == 1 && line.starts_with("\xEF\xBB\xBF")) line.remove_prefix(3);
        if (trim(line).empty()) continue;
        const auto cells = split(line);
        if (!have_header) {
            for (auto c : cells) {
                if (c.empty()) throw DataError(where(source, line_no) + "empty column name in header");
                t.header.emplace_back(c);
            }
            have_header = true;
            continue;
        }
        if (cells.size() != t.header.size())
            throw DataError(where(source, line_no) + "expected " + std::to_string(t.header.size()) + " fields, found " +
                            std::to_string(cells.size()));
        std::vector<double> row(cells.size());
        for (std::size_t j = 0; j < cells.size(); ++j) {
            const auto c = cells[j];
            const char* end = c.data() + c.size();
            auto [ptr, ec] = std::from_chars(c.data(), end, row[j]);
            if (c.empty() || ec != std::errc() || ptr != end || !std::isfinite(row[j]))
                throw DataError(where(source, line_no) + "column '" + t.header[j] + "': '" + std::string(c) +
                                "' is not a finite number");
        }
        t.rows.push_back(std::move(row));
    }
    if (!have_header) throw DataError(source.string() + ": empty file, expected a header row");
    return t;
}

CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_csv(ss.str(), path);
}

Dataset select_dataset(const CsvTable& table, const std::vector<std::string>& covariates,
                       const std::string& response, std::size_t min_rows) {
    const std::size_t y_col = table.column_index(response);
    std::vector<std::size_t> x_cols;
    if (covariates.empty()) {
        for (std::size_t j = 0; j < table.header.size(); ++j)
            if (j != y_col) x_cols.push_back(j);
    } else {
        for (const auto& c : covariates) x_cols.push_back(table.column_index(c));
    }
    if (x_cols.empty()) throw DataError(table.source.string() + ": no covariate columns");
    if (table.rows.size() < min_rows)
        throw DataError(table.source.string() + ": " + std::to_string(table.rows.size()) + " rows, need at least " +
                        std::to_string(min_rows));
    std::vector<double> x;
    std::vector<double> y;
    x.reserve(table.rows.size() * x_cols.size());
    y.reserve(table.rows.size());
    for (const auto& row : table.rows) {
        for (auto j : x_cols) x.push_back(row[j]);
        y.push_back(row[y_col]);
    }
    return Dataset(std::move(x), std::move(y), x_cols.size());
}

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    if (ec != std::errc()) throw NumericalError("cannot format number");
    return std::string(buf, ptr);
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ConfigError("cannot write " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw ConfigError("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

std::string fit_csv(const FitSurface& fit, const std::vector<std::string>& coord_names) {
    std::string s;
    for (const auto& c : coord_names) s += c + ",";
    s += "theta_hat\n";
    std::vector<double> x(fit.grid.dim());
    for (std::size_t k = 0; k < fit.grid.size(); ++k) {
        fit.grid.point(k, x);
        for (double v : x) s += format_double(v) + ",";
        s += format_double(fit.theta_hat[k]) + "\n";
    }
    return s;
}

std::string corridor_csv(const Corridor& cc, const std::vector<std::string>& coord_names) {
    std::string s;
    for (const auto& c : coord_names) s += c + ",";
    s += "theta_hat,lower,upper\n";
    std::vector<double> x(cc.grid.dim());
    for (std::size_t k = 0; k < cc.grid.size(); ++k) {
        cc.grid.point(k, x);
        for (double v : x) s += format_double(v) + ",";
        s += format_double(cc.theta_hat[k]) + "," + format_double(cc.lower[k]) + "," + format_double(cc.upper[k]) + "\n";
    }
    return s;
}

nlohmann::json grid_json(const GridSpec& grid) {
    auto axes = nlohmann::json::array();
    for (const auto& a : grid.axes()) axes.push_back({{"lo", a.lo}, {"hi", a.hi}, {"count", a.count}});
    return axes;
}

nlohmann::json corridor_metadata(const Corridor& cc) {
    const auto& m = cc.meta;
    nlohmann::json j;
    j["method"] = std::string(to_string(cc.method));
    j["alpha"] = cc.alpha;
    j["family"] = std::string(to_string(m.spec.family));
    j["tau"] = m.spec.tau;
    j["n"] = m.n;
    j["grid"] = grid_json(cc.grid);
    j["bandwidth"] = {{"h", m.h}, {"kappa", m.kappa}, {"h0", m.h0}, {"hbar", m.hbar}, {"h1", m.h1}};
    j["volume"] = {{"mean_width", corridor_volume(cc)}, {"region_scaled", corridor_volume_scaled(cc)}};
    if (cc.method == CorridorMethod::asymptotic) {
        j["gumbel"] = {{"d_n", m.d_n}, {"c_alpha", m.c_alpha}, {"critical_value", m.critical_value}};
    } else {
        j["bootstrap"] = {{"B", m.replicates},
                          {"seed", m.seed.value_or(0)},
                          {"variant", m.variant},
                          {"center_mode", m.center_mode},
                          {"xi", m.xi},
                          {"sup_sigma_star_gap", m.sigma_star_gap}};
    }
    j["floored_density_entries"] = m.floored;
    j["warnings"] = m.warnings;
    return j;
}

std::string dump_json(const nlohmann::json& j) { return j.dump(2) + "\n"; }

}  // namespace gqcc
