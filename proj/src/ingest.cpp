#include "airshadow/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include "json.hpp"

namespace airshadow {

namespace {

constexpr std::string_view kSampleHeader = "ts,dev,co2,voc,pm25,pm10,t,rh";

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        auto pos = line.find(',', start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    for (auto& f : out) {
        while (!f.empty() && (f.back() == '\r' || f.back() == ' ')) f.pop_back();
        while (!f.empty() && f.front() == ' ') f.erase(f.begin());
    }
    return out;
}

bool blank(const std::string& line) { return line.find_first_not_of(" \t\r") == std::string::npos; }

std::int64_t cell_of(double ts, double step) {
    // nearest cell, ties to the earlier one
    return static_cast<std::int64_t>(std::ceil(ts / step - 0.5));
}

} // namespace

SampleFormat parse_sample_format(std::string_view name) {
    if (name == "csv") return SampleFormat::Csv;
    if (name == "ndjson" || name == "jsonl") return SampleFormat::Ndjson;
    throw Error(ErrorKind::UnsupportedFormat, std::string(name));
}

SampleFormat format_for_path(const std::string& path) {
    auto dot = path.rfind('.');
    if (dot == std::string::npos) throw Error(ErrorKind::UnsupportedFormat, path);
    return parse_sample_format(std::string_view(path).substr(dot + 1));
}

PollutantSample parse_sample_json(std::string_view line) {
    auto doc = nlohmann::json::parse(line.begin(), line.end(), nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) throw Error(ErrorKind::MalformedRecord, "", "not a JSON object");
    auto ts = doc.find("ts");
    if (ts == doc.end() || !ts->is_number()) throw Error(ErrorKind::MalformedRecord, "ts", "missing or non-numeric");
    auto dev = doc.find("dev");
    if (dev == doc.end() || !dev->is_string()) throw Error(ErrorKind::MalformedRecord, "dev", "missing or non-string");
    PollutantSample s{ts->get<double>(), DeviceId(dev->get<std::string>()), {}};
    for (auto p : kAllPollutants) {
        auto it = doc.find(std::string(token(p)));
        if (it == doc.end() || it->is_null()) continue;
        if (!it->is_number()) throw Error(ErrorKind::MalformedRecord, std::string(token(p)), "non-numeric");
        s.readings[p] = it->get<double>();
    }
    return s;
}

SampleLog parse_sample_log(std::istream& in, SampleFormat format, bool strict) {
    SampleLog log;
    std::string line;
    std::size_t line_no = 0;
    std::vector<int> columns; // csv column -> -2 ts, -1 dev, >=0 pollutant index, -3 ignored
    bool have_header = false;

    auto report = [&](const std::string& reason) {
        if (strict) throw Error(ErrorKind::MalformedRecord, std::to_string(line_no), reason);
        log.issues.push_back({line_no, reason});
    };

    while (std::getline(in, line)) {
        ++line_no;
        if (blank(line)) continue;
        if (format == SampleFormat::Csv && !have_header) {
            for (const auto& name : split_csv(line)) {
                if (name == "ts")
                    columns.push_back(-2);
                else if (name == "dev")
                    columns.push_back(-1);
                else if (auto p = pollutant_from_token(name))
                    columns.push_back(static_cast<int>(index_of(*p)));
                else
                    columns.push_back(-3);
            }
            if (std::count(columns.begin(), columns.end(), -2) != 1 || std::count(columns.begin(), columns.end(), -1) != 1)
                throw Error(ErrorKind::MalformedRecord, std::to_string(line_no), "csv header needs ts and dev columns");
            have_header = true;
            continue;
        }
        try {
            PollutantSample s;
            if (format == SampleFormat::Ndjson) {
                s = parse_sample_json(line);
            } else {
                auto fields = split_csv(line);
                if (fields.size() != columns.size()) throw Error(ErrorKind::MalformedRecord, "", "column count");
                std::optional<double> ts;
                std::optional<DeviceId> dev;
                for (std::size_t i = 0; i < fields.size(); ++i) {
                    const int c = columns[i];
                    if (c == -3) continue;
                    if (c == -1) {
                        dev.emplace(fields[i]);
                        continue;
                    }
                    if (fields[i].empty()) continue;
                    auto v = parse_real(fields[i]);
                    if (!v) throw Error(ErrorKind::MalformedRecord, c == -2 ? "ts" : std::string(token(kAllPollutants[static_cast<std::size_t>(c)])), "non-numeric");
                    if (c == -2)
                        ts = *v;
                    else
                        s.readings.values[static_cast<std::size_t>(c)] = *v;
                }
                if (!ts || !dev) throw Error(ErrorKind::MalformedRecord, "ts", "missing ts or dev");
                s.ts = *ts;
                s.device = *dev;
            }
            if (auto err = check_sample(s)) {
                report(err->what());
                continue;
            }
            log.samples.push_back(std::move(s));
        } catch (const Error& e) {
            if (strict && e.kind() == ErrorKind::MalformedRecord && e.subject() == std::to_string(line_no)) throw;
            report(e.what());
        }
    }
    return log;
}

SampleLog read_sample_file(const std::string& path, bool strict) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, path, "cannot open");
    return parse_sample_log(in, format_for_path(path), strict);
}

std::string to_ndjson(const PollutantSample& s) {
    std::string out = "{\"ts\":" + format_real(s.ts) + ",\"dev\":\"" + s.device.str() + "\"";
    for (auto p : kAllPollutants)
        if (s.readings[p]) out += ",\"" + std::string(token(p)) + "\":" + format_real(*s.readings[p]);
    out += "}";
    return out;
}

void write_sample_csv_header(std::ostream& out) { out << kSampleHeader << '\n'; }

void write_sample_csv(std::ostream& out, const PollutantSample& s) {
    out << format_real(s.ts) << ',' << s.device.str();
    for (auto p : kAllPollutants) {
        out << ',';
        if (s.readings[p]) out << format_real(*s.readings[p]);
    }
    out << '\n';
}

std::vector<ActivityAnnotation> parse_annotations(std::istream& in) {
    std::vector<ActivityAnnotation> out;
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (blank(line)) continue;
        auto fields = split_csv(line);
        if (!have_header) {
            if (fields.size() < 2 || fields[0] != "ts" || fields[1] != "label")
                throw Error(ErrorKind::MalformedRecord, std::to_string(line_no), "expected header ts,label[,annotator]");
            have_header = true;
            continue;
        }
        if (fields.size() < 2 || fields.size() > 3)
            throw Error(ErrorKind::MalformedRecord, std::to_string(line_no), "expected 2 or 3 fields");
        auto ts = parse_real(fields[0]);
        if (!ts || !std::isfinite(*ts)) throw Error(ErrorKind::MalformedRecord, std::to_string(line_no), "bad ts");
        ActivityAnnotation a;
        a.ts = *ts;
        try {
            a.label = parse_activity_label(fields[1]);
        } catch (const Error&) {
            throw Error(ErrorKind::UnknownLabel, std::to_string(line_no), fields[1]);
        }
        if (fields.size() == 3 && !fields[2].empty()) a.annotator = fields[2];
        out.push_back(std::move(a));
    }
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.ts < b.ts; });
    return out;
}

void write_annotations(std::ostream& out, std::span<const ActivityAnnotation> annotations) {
    out << "ts,label,annotator\n";
    for (const auto& a : annotations) out << format_real(a.ts) << ',' << to_text(a.label) << ',' << a.annotator.value_or("") << '\n';
}

AlignedSeries align_series(std::span<const PollutantSample> samples, std::span<const DeviceId> devices, double step) {
    if (samples.empty()) throw Error(ErrorKind::EmptyInput, "samples");
    if (!(step > 0.0)) throw Error(ErrorKind::ConfigMismatch, "step", "must be > 0");
    std::map<std::string, std::size_t> index;
    for (std::size_t d = 0; d < devices.size(); ++d) index.emplace(devices[d].str(), d);

    std::int64_t lo = cell_of(samples.front().ts, step);
    std::int64_t hi = lo;
    for (const auto& s : samples) {
        if (!index.contains(s.device.str())) throw Error(ErrorKind::UnknownDevice, s.device.str());
        lo = std::min(lo, cell_of(s.ts, step));
        hi = std::max(hi, cell_of(s.ts, step));
    }
    AlignedSeries out({devices.begin(), devices.end()}, static_cast<double>(lo) * step, step,
                      static_cast<std::size_t>(hi - lo + 1));
    for (const auto& s : samples) {
        const auto d = index.at(s.device.str());
        const auto k = static_cast<std::size_t>(cell_of(s.ts, step) - lo);
        for (auto p : kAllPollutants)
            if (s.readings[p]) out.channel(d, p)[k] = *s.readings[p];
    }

    const auto max_fill = static_cast<std::size_t>(std::floor(kMaxForwardFillSeconds / step + 1e-9));
    for (std::size_t d = 0; d < devices.size(); ++d) {
        for (auto p : kAllPollutants) {
            auto ch = out.channel(d, p);
            std::size_t last = ch.size(); // last present cell
            for (std::size_t k = 0; k < ch.size(); ++k) {
                if (is_missing(ch[k])) continue;
                if (last != ch.size() && k - last - 1 > 0 && k - last - 1 <= max_fill)
                    std::fill(ch.begin() + static_cast<std::ptrdiff_t>(last) + 1, ch.begin() + static_cast<std::ptrdiff_t>(k), ch[last]);
                last = k;
            }
        }
    }
    return out;
}

void LabeledDataset::append(const LabeledDataset& other) {
    if (labels.empty() && features.rows == 0 && schema.names.empty()) {
        auto keep = provenance;
        auto skips = skipped;
        *this = other;
        if (!keep.sources.empty() || keep.seed != 0) provenance = keep;
        skipped.out_of_bounds += skips.out_of_bounds;
        skipped.too_many_missing += skips.too_many_missing;
        return;
    }
    if (other.schema != schema) throw Error(ErrorKind::SchemaMismatch, "append");
    for (std::size_t i = 0; i < other.features.rows; ++i) features.append_row(other.features.row(i));
    labels.insert(labels.end(), other.labels.begin(), other.labels.end());
    windows.insert(windows.end(), other.windows.begin(), other.windows.end());
    skipped.out_of_bounds += other.skipped.out_of_bounds;
    skipped.too_many_missing += other.skipped.too_many_missing;
}

std::optional<std::size_t> window_start_cell(const AlignedSeries& series, double ts, const WindowConfig& cfg) {
    const auto cells = window_cells(cfg.features.tau, series.step());
    const double start = cfg.placement == WindowPlacement::Centered ? ts - cfg.features.tau / 2.0 : ts - cfg.features.tau;
    const double rel = std::ceil((start - series.t0()) / series.step() - 1e-9);
    if (!std::isfinite(rel) || rel < 0.0) return std::nullopt;
    const auto first = static_cast<std::size_t>(rel);
    if (first + cells > series.length()) return std::nullopt;
    return first;
}

LabeledDataset build_labeled_windows(const AlignedSeries& aligned, std::span<const ActivityAnnotation> annotations,
                                     const WindowConfig& cfg) {
    cfg.features.validate();
    window_cells(cfg.features.tau, aligned.step());

    LabeledDataset ds;
    ds.schema = feature_schema(aligned.devices(), cfg.features);
    ds.features = Matrix(0, ds.schema.size());

    std::vector<std::size_t> starts;
    std::vector<std::size_t> which;
    for (std::size_t i = 0; i < annotations.size(); ++i) {
        if (auto first = window_start_cell(aligned, annotations[i].ts, cfg)) {
            starts.push_back(*first);
            which.push_back(i);
        } else {
            ++ds.skipped.out_of_bounds;
        }
    }
    const auto batch = extract_batch(aligned, starts, cfg.features);
    for (std::size_t w = 0; w < starts.size(); ++w) {
        if (batch.status[w] != WindowStatus::Ok) {
            ++ds.skipped.too_many_missing;
            continue;
        }
        const auto& a = annotations[which[w]];
        ds.features.append_row(batch.values.row(w));
        ds.labels.push_back(a.label);
        ds.windows.push_back({aligned.time_at(starts[w]), cfg.features.tau, a.label, a.ts});
    }
    ds.provenance.config_digest = digest_hex(cfg.features.to_config_text());
    return ds;
}

void write_dataset_csv(std::ostream& out, const LabeledDataset& ds) {
    for (const auto& n : ds.schema.names) out << n << ',';
    out << "label\n";
    for (std::size_t i = 0; i < ds.size(); ++i) {
        for (double v : ds.features.row(i)) out << format_real(v) << ',';
        out << to_text(ds.labels[i]) << '\n';
    }
}

LabeledDataset read_dataset_csv(std::istream& in) {
    LabeledDataset ds;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (blank(line)) continue;
        auto fields = split_csv(line);
        if (ds.schema.names.empty()) {
            if (fields.size() < 2 || fields.back() != "label")
                throw Error(ErrorKind::MalformedRecord, std::to_string(line_no), "dataset header must end with label");
            fields.pop_back();
            for (const auto& name : fields) {
                auto last = name.rfind('.');
                auto mid = last == std::string::npos || last == 0 ? std::string::npos : name.rfind('.', last - 1);
                if (mid == std::string::npos || mid == 0)
                    throw Error(ErrorKind::MalformedRecord, std::to_string(line_no), "bad feature name " + name);
                DeviceId dev(name.substr(0, mid));
                if (ds.schema.devices.empty() || ds.schema.devices.back() != dev) ds.schema.devices.push_back(dev);
            }
            ds.schema.names = fields;
            ds.features = Matrix(0, fields.size());
            continue;
        }
        if (fields.size() != ds.schema.size() + 1)
            throw Error(ErrorKind::MalformedRecord, std::to_string(line_no), "column count");
        std::vector<double> row(ds.schema.size());
        for (std::size_t j = 0; j < row.size(); ++j) {
            auto v = parse_real(fields[j]);
            if (!v || !std::isfinite(*v)) throw Error(ErrorKind::NonFiniteFeature, std::to_string(line_no), fields[j]);
            row[j] = *v;
        }
        ActivityLabel label;
        try {
            label = parse_activity_label(fields.back());
        } catch (const Error&) {
            throw Error(ErrorKind::UnknownLabel, std::to_string(line_no), fields.back());
        }
        ds.features.append_row(row);
        ds.labels.push_back(label);
    }
    if (ds.schema.names.empty()) throw Error(ErrorKind::EmptyDataset, "", "no header");
    return ds;
}

} // namespace airshadow
