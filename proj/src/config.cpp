#include "airshadow/config.hpp"

#include "airshadow/core.hpp"

#include <fstream>

namespace airshadow {

namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

} // namespace

const std::string* ConfigSection::find(const std::string& key) const {
    const std::string* hit = nullptr;
    for (const auto& [k, v] : entries)
        if (k == key) hit = &v; // last assignment wins
    return hit;
}

std::string ConfigSection::get(const std::string& key, const std::string& fallback) const {
    const auto* v = find(key);
    return v ? *v : fallback;
}

double ConfigSection::get_real(const std::string& key, double fallback) const {
    const auto* v = find(key);
    if (!v) return fallback;
    auto r = parse_real(*v);
    if (!r) throw Error(ErrorKind::MalformedRecord, name + "." + key, "expected a number, got '" + *v + "'");
    return *r;
}

std::int64_t ConfigSection::get_int(const std::string& key, std::int64_t fallback) const {
    const auto* v = find(key);
    if (!v) return fallback;
    auto r = parse_real(*v);
    if (!r || *r != static_cast<double>(static_cast<std::int64_t>(*r)))
        throw Error(ErrorKind::MalformedRecord, name + "." + key, "expected an integer, got '" + *v + "'");
    return static_cast<std::int64_t>(*r);
}

bool ConfigSection::get_bool(const std::string& key, bool fallback) const {
    const auto* v = find(key);
    if (!v) return fallback;
    if (*v == "true" || *v == "1" || *v == "yes" || *v == "on") return true;
    if (*v == "false" || *v == "0" || *v == "no" || *v == "off") return false;
    throw Error(ErrorKind::MalformedRecord, name + "." + key, "expected a boolean, got '" + *v + "'");
}

const ConfigSection* Config::section(const std::string& name) const {
    for (const auto& s : sections)
        if (s.name == name) return &s;
    return nullptr;
}

std::vector<const ConfigSection*> Config::all(const std::string& name) const {
    std::vector<const ConfigSection*> out;
    for (const auto& s : sections)
        if (s.name == name) out.push_back(&s);
    return out;
}

Config parse_config(std::istream& in) {
    Config cfg;
    cfg.sections.push_back(ConfigSection{"", {}, {}, 0});
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        auto hash = raw.find('#');
        std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']' || line.size() < 3)
                throw Error(ErrorKind::MalformedRecord, std::to_string(line_no), "bad section header");
            cfg.sections.push_back(ConfigSection{trim(line.substr(1, line.size() - 2)), {}, {}, line_no});
            continue;
        }
        auto eq = line.find('=');
        if (eq != std::string::npos) {
            auto key = trim(line.substr(0, eq));
            if (key.empty()) throw Error(ErrorKind::MalformedRecord, std::to_string(line_no), "empty key");
            cfg.sections.back().entries.emplace_back(key, trim(line.substr(eq + 1)));
        } else {
            cfg.sections.back().lines.push_back(line);
        }
    }
    return cfg;
}

Config load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, path, "cannot open");
    return parse_config(in);
}

std::vector<std::string> split_list(const std::string& text, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto pos = text.find(sep, start);
        if (pos == std::string::npos) pos = text.size();
        auto item = trim(text.substr(start, pos - start));
        if (!item.empty()) out.push_back(item);
        start = pos + 1;
    }
    return out;
}

} // namespace airshadow
