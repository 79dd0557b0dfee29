#include "lorentz/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "lorentz/errors.hpp"

namespace lorentz
{
namespace
{
std::string trim(std::string_view s)
{
    auto const first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos)
        return {};
    auto const last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

bool valid_key(std::string const& key)
{
    if (key.empty() || key.front() == '.' || key.back() == '.')
        return false;
    return std::all_of(key.begin(), key.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_'
               || c == '.' || c == '-';
    });
}

std::pair<std::string, std::string>
split_assignment(std::string const& line, std::string const& where)
{
    auto const eq = line.find('=');
    if (eq == std::string::npos)
        throw ConfigError(where + "expected key = value, got '" + line + "'");
    std::string key = trim(std::string_view(line).substr(0, eq));
    std::string value = trim(std::string_view(line).substr(eq + 1));
    if (!valid_key(key))
        throw ConfigError(where + "invalid key '" + key + "'");
    return {std::move(key), std::move(value)};
}

template<class T>
T parse_number(std::string const& key, std::string const& text)
{
    T value{};
    auto const* end = text.data() + text.size();
    auto const [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc{} || ptr != end || text.empty())
        throw ConfigError("key '" + key + "': cannot parse '" + text + "'");
    return value;
}
}  // namespace

Config Config::parse(std::string const& text, std::string const& origin)
{
    Config cfg;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line))
    {
        ++line_no;
        if (auto const hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        if (trim(line).empty())
            continue;
        std::string const where
            = (origin.empty() ? "line " : origin + ":") + std::to_string(line_no)
              + ": ";
        auto [key, value] = split_assignment(line, where);
        cfg.set(key, value);
    }
    return cfg;
}

Config Config::load(std::filesystem::path const& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file '" + path.string() + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse(buffer.str(), path.string());
}

void Config::apply_override(std::string const& assignment)
{
    auto [key, value] = split_assignment(assignment, "override: ");
    set(key, value);
}

void Config::set(std::string const& key, std::string const& value)
{
    for (auto& entry : entries_)
    {
        if (entry.first == key)
        {
            entry.second = value;
            return;
        }
    }
    entries_.emplace_back(key, value);
}

bool Config::has(std::string const& key) const
{
    return std::any_of(entries_.begin(), entries_.end(),
                       [&](auto const& e) { return e.first == key; });
}

std::string const& Config::get(std::string const& key) const
{
    for (auto const& entry : entries_)
    {
        if (entry.first == key)
            return entry.second;
    }
    throw ConfigError("missing key '" + key + "'");
}

double Config::get_double(std::string const& key) const
{
    return parse_number<double>(key, get(key));
}

std::int64_t Config::get_int(std::string const& key) const
{
    return parse_number<std::int64_t>(key, get(key));
}

std::uint64_t Config::get_uint(std::string const& key) const
{
    std::string const& text = get(key);
    // Accept 1e5-style counts when they are exact integers
    if (text.find_first_of("eE.") != std::string::npos)
    {
        double const d = parse_number<double>(key, text);
        if (!(d >= 0) || d != static_cast<double>(static_cast<std::uint64_t>(d)))
            throw ConfigError("key '" + key + "': not a non-negative integer");
        return static_cast<std::uint64_t>(d);
    }
    return parse_number<std::uint64_t>(key, text);
}

bool Config::get_bool(std::string const& key) const
{
    std::string v = get(key);
    std::transform(v.begin(), v.end(), v.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    if (v == "true" || v == "1" || v == "yes" || v == "on")
        return true;
    if (v == "false" || v == "0" || v == "no" || v == "off")
        return false;
    throw ConfigError("key '" + key + "': expected a boolean, got '" + v + "'");
}

std::vector<double> Config::get_list(std::string const& key) const
{
    std::vector<double> out;
    std::stringstream ss(get(key));
    std::string item;
    while (std::getline(ss, item, ','))
        out.push_back(parse_number<double>(key, trim(item)));
    if (out.empty())
        throw ConfigError("key '" + key + "': empty list");
    return out;
}

std::pair<int, int> Config::get_range(std::string const& key) const
{
    std::string const& text = get(key);
    auto const dots = text.find("..");
    if (dots == std::string::npos)
    {
        int const k = parse_number<int>(key, trim(text));
        return {k, k};
    }
    int const a = parse_number<int>(key, trim(text.substr(0, dots)));
    int const b = parse_number<int>(key, trim(text.substr(dots + 2)));
    if (b < a)
        throw ConfigError("key '" + key + "': empty range '" + text + "'");
    return {a, b};
}

Config resolve_config(Config const& user, std::vector<KeySpec> const& schema)
{
    std::vector<std::string> unknown;
    for (auto const& [key, value] : user.entries())
    {
        bool const known = std::any_of(schema.begin(), schema.end(),
                                       [&](KeySpec const& k) { return k.key == key; });
        if (!known)
            unknown.push_back(key);
    }
    if (!unknown.empty())
    {
        std::string msg = "unknown config key(s):";
        for (auto const& k : unknown)
            msg += " '" + k + "'";
        throw ConfigError(msg);
    }
    Config out;
    for (auto const& spec : schema)
        out.set(spec.key, user.has(spec.key) ? user.get(spec.key) : spec.default_value);
    return out;
}

}  // namespace lorentz
