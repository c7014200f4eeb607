#include "delcode/config.hpp"

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fstream>
#include <sstream>

namespace delcode {

namespace pt = boost::property_tree;

IniConfig IniConfig::parse(const std::string& text, std::filesystem::path base_dir) {
    // property_tree's INI reader only accepts ';' comments; strip '#' lines too.
    std::istringstream raw(text);
    std::ostringstream cleaned;
    std::string line;
    while (std::getline(raw, line)) {
        auto trimmed = boost::algorithm::trim_copy(line);
        if (trimmed.empty() || trimmed[0] == '#')
            cleaned << '\n';
        else
            cleaned << line << '\n';
    }
    pt::ptree tree;
    std::istringstream in(cleaned.str());
    try {
        pt::ini_parser::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError("config: " + std::string(e.what()));
    }
    IniConfig cfg;
    cfg.base_dir_ = std::move(base_dir);
    for (const auto& [section, child] : tree) {
        if (child.empty())
            throw ConfigError("config: key '" + section + "' appears outside any [section]");
        for (const auto& [key, value] : child)
            cfg.values_[section][key] = boost::algorithm::trim_copy(value.data());
    }
    return cfg;
}

IniConfig IniConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("config: cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), path.parent_path());
}

bool IniConfig::has(const std::string& section, const std::string& key) const {
    auto s = values_.find(section);
    return s != values_.end() && s->second.count(key) > 0;
}

bool IniConfig::has_section(const std::string& section) const { return values_.count(section) > 0; }

namespace {

[[noreturn]] void bad(const std::string& section, const std::string& key, const std::string& why) {
    throw ConfigError("config key '" + section + "." + key + "': " + why);
}

}  // namespace

std::string IniConfig::get_string(const std::string& section, const std::string& key,
                                  std::optional<std::string> fallback) const {
    auto s = values_.find(section);
    if (s != values_.end()) {
        auto it = s->second.find(key);
        if (it != s->second.end())
            return it->second;
    }
    if (fallback)
        return *fallback;
    bad(section, key, "missing");
}

long long IniConfig::get_int(const std::string& section, const std::string& key,
                             std::optional<long long> fallback) const {
    if (!has(section, key)) {
        if (fallback)
            return *fallback;
        bad(section, key, "missing");
    }
    const auto v = get_string(section, key);
    try {
        std::size_t used = 0;
        const long long x = std::stoll(v, &used);
        if (used != v.size())
            throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        bad(section, key, "expected an integer, got '" + v + "'");
    }
}

double IniConfig::get_double(const std::string& section, const std::string& key,
                             std::optional<double> fallback) const {
    if (!has(section, key)) {
        if (fallback)
            return *fallback;
        bad(section, key, "missing");
    }
    const auto v = get_string(section, key);
    try {
        std::size_t used = 0;
        const double x = std::stod(v, &used);
        if (used != v.size())
            throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        bad(section, key, "expected a number, got '" + v + "'");
    }
}

bool IniConfig::get_bool(const std::string& section, const std::string& key, std::optional<bool> fallback) const {
    if (!has(section, key)) {
        if (fallback)
            return *fallback;
        bad(section, key, "missing");
    }
    auto v = boost::algorithm::to_lower_copy(get_string(section, key));
    if (v == "true" || v == "1" || v == "yes" || v == "on")
        return true;
    if (v == "false" || v == "0" || v == "no" || v == "off")
        return false;
    bad(section, key, "expected a boolean, got '" + v + "'");
}

std::vector<double> IniConfig::get_doubles(const std::string& section, const std::string& key,
                                           std::optional<std::vector<double>> fallback) const {
    if (!has(section, key)) {
        if (fallback)
            return *fallback;
        bad(section, key, "missing");
    }
    std::vector<std::string> parts;
    const auto v = get_string(section, key);
    if (boost::algorithm::trim_copy(v).empty())
        return {};
    boost::algorithm::split(parts, v, boost::is_any_of(","));
    std::vector<double> out;
    for (auto& p : parts) {
        boost::algorithm::trim(p);
        try {
            std::size_t used = 0;
            out.push_back(std::stod(p, &used));
            if (used != p.size())
                throw std::invalid_argument(p);
        } catch (const std::exception&) {
            bad(section, key, "expected a comma-separated list of numbers, got '" + v + "'");
        }
    }
    return out;
}

std::vector<int> IniConfig::get_ints(const std::string& section, const std::string& key,
                                     std::optional<std::vector<int>> fallback) const {
    std::optional<std::vector<double>> fb;
    if (fallback)
        fb = std::vector<double>(fallback->begin(), fallback->end());
    std::vector<int> out;
    for (double d : get_doubles(section, key, fb)) {
        if (d != static_cast<double>(static_cast<int>(d)))
            bad(section, key, "expected integers");
        out.push_back(static_cast<int>(d));
    }
    return out;
}

std::filesystem::path IniConfig::get_path(const std::string& section, const std::string& key) const {
    std::filesystem::path p = get_string(section, key);
    if (p.is_relative() && !base_dir_.empty())
        p = base_dir_ / p;
    return p;
}

void IniConfig::check_keys(const std::string& section, const std::set<std::string>& allowed) const {
    auto s = values_.find(section);
    if (s == values_.end())
        return;
    for (const auto& [key, value] : s->second)
        if (!allowed.count(key))
            bad(section, key, "unknown key");
}

void IniConfig::set(const std::string& section, const std::string& key, const std::string& value) {
    values_[section][key] = value;
}

}  // namespace delcode
