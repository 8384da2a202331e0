#include "airshadow/core.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>

namespace airshadow {

namespace {

constexpr std::array<std::string_view, kPollutantCount> kTokens{"co2", "voc", "pm25", "pm10", "t", "rh"};
constexpr std::array<std::string_view, kLabelCount> kLabelTexts{
    "enter", "exit", "fan_on", "fan_off", "ac_on", "ac_off", "gathering", "eating"};

std::string compose(ErrorKind kind, const std::string& subject, const std::string& detail) {
    std::string msg{to_string(kind)};
    if (!subject.empty()) msg += "(" + subject + ")";
    if (!detail.empty()) msg += ": " + detail;
    return msg;
}

} // namespace

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::UnknownLabel: return "UnknownLabel";
    case ErrorKind::NonFiniteReading: return "NonFiniteReading";
    case ErrorKind::NegativeConcentration: return "NegativeConcentration";
    case ErrorKind::HumidityOutOfRange: return "HumidityOutOfRange";
    case ErrorKind::EmptyReadings: return "EmptyReadings";
    case ErrorKind::InvalidDevice: return "InvalidDevice";
    case ErrorKind::MalformedRecord: return "MalformedRecord";
    case ErrorKind::UnsupportedFormat: return "UnsupportedFormat";
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::UnknownDevice: return "UnknownDevice";
    case ErrorKind::ConfigMismatch: return "ConfigMismatch";
    case ErrorKind::TooManyMissing: return "TooManyMissing";
    case ErrorKind::EmptyWindow: return "EmptyWindow";
    case ErrorKind::WindowTooShort: return "WindowTooShort";
    case ErrorKind::ThresholdOrder: return "ThresholdOrder";
    case ErrorKind::EmptyDevices: return "EmptyDevices";
    case ErrorKind::NonPositiveDt: return "NonPositiveDt";
    case ErrorKind::InvalidScenario: return "InvalidScenario";
    case ErrorKind::Infeasible: return "Infeasible";
    case ErrorKind::EmptyDataset: return "EmptyDataset";
    case ErrorKind::NonFiniteFeature: return "NonFiniteFeature";
    case ErrorKind::SchemaMismatch: return "SchemaMismatch";
    case ErrorKind::VersionMismatch: return "VersionMismatch";
    case ErrorKind::CorruptModel: return "CorruptModel";
    case ErrorKind::ClassTooSmall: return "ClassTooSmall";
    case ErrorKind::KTooLarge: return "KTooLarge";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::UnknownClass: return "UnknownClass";
    case ErrorKind::EmptyMatrix: return "EmptyMatrix";
    case ErrorKind::BindFailure: return "BindFailure";
    case ErrorKind::StorageFailure: return "StorageFailure";
    case ErrorKind::Io: return "Io";
    }
    return "Unknown";
}

Error::Error(ErrorKind kind, std::string subject, const std::string& detail)
    : std::runtime_error(compose(kind, subject, detail)), kind_(kind), subject_(std::move(subject)) {}

std::string_view token(PollutantKind p) { return kTokens[index_of(p)]; }

std::optional<PollutantKind> pollutant_from_token(std::string_view tok) {
    for (auto p : kAllPollutants)
        if (token(p) == tok) return p;
    return std::nullopt;
}

std::string_view to_text(ActivityLabel label) { return kLabelTexts[static_cast<std::size_t>(label)]; }

ActivityLabel parse_activity_label(std::string_view text) {
    std::string norm;
    norm.reserve(text.size());
    for (char c : text) {
        auto uc = static_cast<unsigned char>(c);
        if (c == ' ' || c == '-' || c == '_')
            norm.push_back('_');
        else
            norm.push_back(static_cast<char>(std::tolower(uc)));
    }
    // trim surrounding separators/whitespace
    auto first = norm.find_first_not_of("_\t\r\n");
    auto last = norm.find_last_not_of("_\t\r\n");
    if (first != std::string::npos) norm = norm.substr(first, last - first + 1);
    for (std::size_t i = 0; i < kLabelCount; ++i)
        if (kLabelTexts[i] == norm) return kAllLabels[i];
    throw Error(ErrorKind::UnknownLabel, std::string(text));
}

DeviceId::DeviceId(std::string id) : id_(std::move(id)) {
    auto bad = [](char c) {
        auto uc = static_cast<unsigned char>(c);
        return uc < 0x21 || uc > 0x7e || c == '/' || c == '\\' || c == ',' || c == '"';
    };
    if (id_.empty() || id_.size() > 32 || std::any_of(id_.begin(), id_.end(), bad) || id_ == "." || id_ == "..")
        throw Error(ErrorKind::InvalidDevice, id_);
}

std::size_t Readings::count() const noexcept {
    return static_cast<std::size_t>(std::count_if(values.begin(), values.end(), [](auto& v) { return v.has_value(); }));
}

std::optional<Error> check_sample(const PollutantSample& s) {
    if (!std::isfinite(s.ts)) return Error(ErrorKind::NonFiniteReading, "ts");
    if (s.readings.count() == 0) return Error(ErrorKind::EmptyReadings, s.device.str());
    for (auto p : kAllPollutants) {
        const auto& r = s.readings[p];
        if (!r) continue;
        std::string field{token(p)};
        if (!std::isfinite(*r)) return Error(ErrorKind::NonFiniteReading, field);
        switch (p) {
        case PollutantKind::CO2:
        case PollutantKind::VOC:
        case PollutantKind::PM2_5:
        case PollutantKind::PM10:
            if (*r < 0.0) return Error(ErrorKind::NegativeConcentration, field);
            break;
        case PollutantKind::Humidity:
            if (*r < 0.0 || *r > 100.0) return Error(ErrorKind::HumidityOutOfRange, field);
            break;
        case PollutantKind::Temperature: break;
        }
    }
    return std::nullopt;
}

const PollutantSample& validate_sample(const PollutantSample& s) {
    if (auto err = check_sample(s)) throw *err;
    return s;
}

std::string format_real(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), ptr);
}

std::optional<double> parse_real(std::string_view text) {
    while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
    while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) text.remove_suffix(1);
    if (text.empty()) return std::nullopt;
    if (text.front() == '+') text.remove_prefix(1);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size()) return std::nullopt;
    return v;
}

std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string digest_hex(std::string_view data) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(data)));
    return buf;
}

} // namespace airshadow
