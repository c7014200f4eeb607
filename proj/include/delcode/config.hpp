#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>

#include "delcode/common.hpp"

namespace delcode {

class ConfigError : public Error {
public:
    using Error::Error;
};

/// Flat sectioned key = value file:
///
///   # comment
///   [section]
///   key = value
///
/// Lists are comma separated. Lookups name the offending "section.key" in errors.
class IniConfig {
public:
    static IniConfig parse(const std::string& text, std::filesystem::path base_dir = {});
    static IniConfig load(const std::filesystem::path& path);

    bool has(const std::string& section, const std::string& key) const;
    bool has_section(const std::string& section) const;

    std::string get_string(const std::string& section, const std::string& key,
                           std::optional<std::string> fallback = std::nullopt) const;
    long long get_int(const std::string& section, const std::string& key,
                      std::optional<long long> fallback = std::nullopt) const;
    double get_double(const std::string& section, const std::string& key,
                      std::optional<double> fallback = std::nullopt) const;
    bool get_bool(const std::string& section, const std::string& key, std::optional<bool> fallback = std::nullopt) const;
    std::vector<double> get_doubles(const std::string& section, const std::string& key,
                                    std::optional<std::vector<double>> fallback = std::nullopt) const;
    std::vector<int> get_ints(const std::string& section, const std::string& key,
                              std::optional<std::vector<int>> fallback = std::nullopt) const;
    /// Relative paths resolve against the directory of the config file.
    std::filesystem::path get_path(const std::string& section, const std::string& key) const;

    /// Rejects keys in `section` outside `allowed`.
    void check_keys(const std::string& section, const std::set<std::string>& allowed) const;

    void set(const std::string& section, const std::string& key, const std::string& value);

private:
    std::map<std::string, std::map<std::string, std::string>> values_;
    std::filesystem::path base_dir_;
};

}  // namespace delcode
