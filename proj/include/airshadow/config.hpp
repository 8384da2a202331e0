#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace airshadow {

/// The structured-text format shared by scenario, feature and model-spec
/// files:
///
///     # comment
///     [section]
///     key = value
///     free-form line          (kept verbatim, e.g. script events)
///
/// Sections may repeat; order is preserved. Keys are case-sensitive.
struct ConfigSection {
    std::string name;
    std::vector<std::pair<std::string, std::string>> entries;
    std::vector<std::string> lines;
    std::size_t line_no = 0;

    const std::string* find(const std::string& key) const;
    std::string get(const std::string& key, const std::string& fallback) const;
    double get_real(const std::string& key, double fallback) const;
    std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
};

struct Config {
    std::vector<ConfigSection> sections;

    const ConfigSection* section(const std::string& name) const;
    std::vector<const ConfigSection*> all(const std::string& name) const;
};

/// Throws Error(MalformedRecord) with the line number as subject.
Config parse_config(std::istream& in);
Config load_config(const std::string& path);

std::vector<std::string> split_list(const std::string& text, char sep = ',');

} // namespace airshadow
