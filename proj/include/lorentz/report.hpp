#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "lorentz/config.hpp"

namespace lorentz
{
using Cell = std::variant<double, std::int64_t, std::string>;

//! Column-labelled table written as CSV; doubles use %.17g.
struct Table
{
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;

    void add_row(std::vector<Cell> row);
    double number(std::size_t row, std::string const& column) const;
    std::string to_csv() const;
};

struct Report
{
    std::string experiment;
    Table table;
    nlohmann::json summary = nlohmann::json::object();
    std::vector<std::string> warnings;
};

//! Metadata sidecar: experiment, resolved config, seed, version, timing.
nlohmann::json report_metadata(Report const& report,
                               Config const& resolved,
                               double wall_seconds,
                               unsigned threads);

//! Write `csv_path` and the JSON sidecar next to it (extension .json).
void write_report(Report const& report,
                  Config const& resolved,
                  std::filesystem::path const& csv_path,
                  double wall_seconds,
                  unsigned threads);

std::string format_double(double x);

}  // namespace lorentz
