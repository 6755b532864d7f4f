#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "gqcc/corridor.hpp"
#include "gqcc/data.hpp"
#include "gqcc/estimator.hpp"

namespace gqcc {

inline constexpr std::string_view kToolVersion = "1.0.0";

/// Numeric CSV with a header row.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
    std::filesystem::path source;

    // @throws DataError naming the missing column.
    [[nodiscard]] std::size_t column_index(std::string_view name) const;
};

/// Parses comma-separated numbers with '.' decimals. Errors carry the
/// 1-based line number.
/// @throws DataError on malformed rows or unreadable files.
CsvTable parse_csv(std::string_view text, const std::filesystem::path& source = "<memory>");
CsvTable read_csv(const std::filesystem::path& path);

/// Covariates by name (all but `response` when `covariates` is empty).
/// @throws DataError on missing columns or fewer than `min_rows` rows.
Dataset select_dataset(const CsvTable& table, const std::vector<std::string>& covariates,
                       const std::string& response, std::size_t min_rows = 10);

// Shortest round-trip is not used: always 17 significant digits, '.' decimal.
std::string format_double(double v);

/// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

std::string fit_csv(const FitSurface& fit, const std::vector<std::string>& coord_names);
std::string corridor_csv(const Corridor& cc, const std::vector<std::string>& coord_names);

nlohmann::json grid_json(const GridSpec& grid);
nlohmann::json corridor_metadata(const Corridor& cc);

// Deterministic pretty print with a trailing newline.
std::string dump_json(const nlohmann::json& j);

}  // namespace gqcc
