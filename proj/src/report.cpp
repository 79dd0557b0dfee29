#include "lorentz/report.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "lorentz/errors.hpp"

namespace lorentz
{
std::string format_double(double x)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

namespace
{
std::string quote_if_needed(std::string const& s)
{
    if (s.find_first_of(",\"\n") == std::string::npos)
        return s;
    std::string out = "\"";
    for (char c : s)
    {
        if (c == '"')
            out += '"';
        out += c;
    }
    return out + "\"";
}

std::string format_cell(Cell const& cell)
{
    if (auto const* d = std::get_if<double>(&cell))
        return format_double(*d);
    if (auto const* i = std::get_if<std::int64_t>(&cell))
        return std::to_string(*i);
    return quote_if_needed(std::get<std::string>(cell));
}
}  // namespace

void Table::add_row(std::vector<Cell> row)
{
    if (row.size() != columns.size())
        throw DomainError("row width does not match the table header");
    rows.push_back(std::move(row));
}

double Table::number(std::size_t row, std::string const& column) const
{
    for (std::size_t c = 0; c < columns.size(); ++c)
    {
        if (columns[c] != column)
            continue;
        Cell const& cell = rows.at(row).at(c);
        if (auto const* d = std::get_if<double>(&cell))
            return *d;
        if (auto const* i = std::get_if<std::int64_t>(&cell))
            return static_cast<double>(*i);
        throw DomainError("column '" + column + "' is not numeric");
    }
    throw DomainError("no column '" + column + "'");
}

std::string Table::to_csv() const
{
    std::ostringstream out;
    for (std::size_t c = 0; c < columns.size(); ++c)
        out << (c ? "," : "") << quote_if_needed(columns[c]);
    out << '\n';
    for (auto const& row : rows)
    {
        for (std::size_t c = 0; c < row.size(); ++c)
            out << (c ? "," : "") << format_cell(row[c]);
        out << '\n';
    }
    return out.str();
}

nlohmann::json report_metadata(Report const& report,
                               Config const& resolved,
                               double wall_seconds,
                               unsigned threads)
{
    nlohmann::json meta;
    meta["experiment"] = report.experiment;
    meta["version"] = LORENTZ_VERSION;
    nlohmann::json cfg = nlohmann::json::object();
    for (auto const& [key, value] : resolved.entries())
        cfg[key] = value;
    meta["config"] = cfg;
    meta["seed"] = resolved.has("seed") ? resolved.get("seed") : "";
    meta["threads"] = threads;
    meta["wall_seconds"] = wall_seconds;
    meta["summary"] = report.summary;
    meta["warnings"] = report.warnings;
    return meta;
}

void write_report(Report const& report,
                  Config const& resolved,
                  std::filesystem::path const& csv_path,
                  double wall_seconds,
                  unsigned threads)
{
    if (csv_path.has_parent_path())
        std::filesystem::create_directories(csv_path.parent_path());
    std::ofstream csv(csv_path);
    if (!csv)
        throw ConfigError("cannot write '" + csv_path.string() + "'");
    csv << report.table.to_csv();

    auto json_path = csv_path;
    json_path.replace_extension(".json");
    std::ofstream js(json_path);
    if (!js)
        throw ConfigError("cannot write '" + json_path.string() + "'");
    js << report_metadata(report, resolved, wall_seconds, threads).dump(2)
       << '\n';
}

}  // namespace lorentz
