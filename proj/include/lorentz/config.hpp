#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace lorentz
{
//---------------------------------------------------------------------------//
/*!
 * Flat key-value configuration.
 *
 * Text format: one `key = value` per line, `#` starts a comment, keys are
 * dotted identifiers. Later assignments override earlier ones. Typed
 * getters throw ConfigError on malformed values.
 */
class Config
{
  public:
    static Config parse(std::string const& text, std::string const& origin = "");
    static Config load(std::filesystem::path const& path);

    //! Parse and apply one `key=value` override
    void apply_override(std::string const& assignment);
    void set(std::string const& key, std::string const& value);

    bool has(std::string const& key) const;
    std::string const& get(std::string const& key) const;

    double get_double(std::string const& key) const;
    std::int64_t get_int(std::string const& key) const;
    std::uint64_t get_uint(std::string const& key) const;
    bool get_bool(std::string const& key) const;
    //! Comma-separated numbers
    std::vector<double> get_list(std::string const& key) const;
    //! Inclusive integer range "a..b" (or a single integer)
    std::pair<int, int> get_range(std::string const& key) const;

    //! Entries in insertion order (overrides keep their first position)
    std::vector<std::pair<std::string, std::string>> const& entries() const
    {
        return entries_;
    }

  private:
    std::vector<std::pair<std::string, std::string>> entries_;
};

//! A key accepted by an experiment, with its default value.
struct KeySpec
{
    std::string key;
    std::string default_value;
    std::string help;
};

/*!
 * Validate a config against a schema and fill in defaults.
 *
 * Unknown keys raise ConfigError. The returned config lists every schema
 * key in schema order.
 */
Config resolve_config(Config const& user, std::vector<KeySpec> const& schema);

}  // namespace lorentz
