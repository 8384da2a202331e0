#include <cmath>
#include <cstdio>
#include <iomanip>
#include <limits>
#include <sstream>

#include "airshadow/eval.hpp"
#include "json.hpp"

namespace airshadow {

namespace {

using nlohmann::json;

std::string fixed(double v, int digits) {
    if (std::isnan(v)) return "n/a";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::vector<std::string> split_csv_record(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(std::move(cur));
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(std::move(cur));
    return out;
}

std::array<double, 10> metric_values(const BenchmarkRow& r) {
    return {r.train.f1, r.train.precision, r.train.recall, r.test.f1,         r.test.precision,
            r.test.recall, r.cv_train_mean, r.cv_test_mean, r.cv_train_std, r.cv_test_std};
}

std::string class_name(const BenchmarkReport& rep, std::size_t i) {
    return i < rep.class_names.size() ? rep.class_names[i] : std::to_string(rep.classes[i]);
}

void render_text(std::ostream& out, const BenchmarkReport& rep) {
    constexpr int kCell = 7;
    auto cells = [&](std::initializer_list<std::string> items) {
        out << std::right;
        for (const auto& s : items) out << std::setw(kCell) << s;
        out << std::left;
    };
    out << std::left << std::setw(20) << "Model" << std::setw(32) << "Parameters";
    out << '|' << std::setw(3 * kCell) << " Training (weighted)" << " |" << std::setw(3 * kCell) << " Testing (weighted)"
        << " |" << std::setw(2 * kCell) << " CV mean" << " |" << " CV std\n";
    out << std::setw(20) << "" << std::setw(32) << "" << '|';
    cells({"F1", "P", "R"});
    out << " |";
    cells({"F1", "P", "R"});
    out << " |";
    cells({"Train", "Test"});
    out << " |";
    cells({"Train", "Test"});
    out << '\n';
    for (const auto& r : rep.rows) {
        const auto v = metric_values(r);
        auto f = [&](std::size_t i) { return fixed(v[i], 3); };
        out << std::setw(20) << r.spec.name() << std::setw(32) << r.spec.params_text() << '|';
        cells({f(0), f(1), f(2)});
        out << " |";
        cells({f(3), f(4), f(5)});
        out << " |";
        cells({f(6), f(7)});
        out << " |";
        cells({f(8), f(9)});
        out << '\n';
    }
    if (!rep.rows.empty())
        out << "\nDataset: " << rep.dataset << " (" << rep.samples << " windows, " << rep.features << " features); "
            << "split " << format_real(rep.protocol.split_frac) << (rep.protocol.stratify ? " stratified" : "")
            << ", " << rep.protocol.k << "-fold CV, seed " << rep.protocol.seed << '\n';
}

void render_markdown(std::ostream& out, const BenchmarkReport& rep) {
    out << "| Model | Parameters | Train F1 | Train P | Train R | Test F1 | Test P | Test R | CV train mean | CV test mean "
           "| CV train std | CV test std |\n";
    out << "|---|---|---:|---:|---:|---:|---:|---:|---:|---:|---:|---:|\n";
    for (const auto& r : rep.rows) {
        out << "| " << r.spec.name() << " | " << r.spec.params_text() << " |";
        for (double v : metric_values(r)) out << ' ' << fixed(v, 4) << " |";
        out << '\n';
    }
    if (!rep.rows.empty())
        out << "\nDataset `" << rep.dataset << "`: " << rep.samples << " windows, " << rep.features
            << " features. Split " << format_real(rep.protocol.split_frac)
            << (rep.protocol.stratify ? " (stratified)" : "") << ", " << rep.protocol.k << "-fold CV, seed "
            << rep.protocol.seed << ".\n";
}

void render_csv(std::ostream& out, const BenchmarkReport& rep) {
    out << kReportCsvHeader << '\n';
    for (const auto& r : rep.rows) {
        out << csv_field(r.spec.name()) << ',' << csv_field(r.spec.params_text());
        for (double v : metric_values(r)) out << ',' << format_real(v);
        out << '\n';
    }
}

void render_plot_data(std::ostream& out, const BenchmarkReport& rep) {
    out << "# confusion\nmodel,params,true,predicted,count\n";
    for (const auto& r : rep.rows) {
        const auto& cm = r.test_confusion;
        for (std::size_t i = 0; i < cm.counts.size(); ++i)
            for (std::size_t j = 0; j < cm.counts[i].size(); ++j)
                out << csv_field(r.spec.name()) << ',' << csv_field(r.spec.params_text()) << ',' << class_name(rep, i)
                    << ',' << class_name(rep, j) << ',' << cm.counts[i][j] << '\n';
    }
    out << "# roc\nmodel,params,class,threshold,fpr,tpr\n";
    for (const auto& r : rep.rows) {
        for (std::size_t c = 0; c < r.test_roc.curves.size(); ++c) {
            const auto& curve = r.test_roc.curves[c];
            for (std::size_t i = 0; i < curve.fpr.size(); ++i)
                out << csv_field(r.spec.name()) << ',' << csv_field(r.spec.params_text()) << ',' << class_name(rep, c)
                    << ',' << format_real(curve.thresholds[i]) << ',' << format_real(curve.fpr[i]) << ','
                    << format_real(curve.tpr[i]) << '\n';
        }
    }
    out << "# auc\nmodel,params,class,auc\n";
    for (const auto& r : rep.rows) {
        for (std::size_t c = 0; c < r.test_roc.curves.size(); ++c)
            out << csv_field(r.spec.name()) << ',' << csv_field(r.spec.params_text()) << ',' << class_name(rep, c)
                << ',' << (r.test_roc.curves[c].present ? format_real(r.test_roc.curves[c].auc) : "absent") << '\n';
        out << csv_field(r.spec.name()) << ',' << csv_field(r.spec.params_text()) << ",macro,"
            << format_real(r.test_roc.macro_auc) << '\n';
    }
}

json real_json(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double json_real(const json& j, double fallback) { return j.is_number() ? j.get<double>() : fallback; }

json metrics_json(const Metrics& m) {
    json per = json::array();
    for (const auto& c : m.per_class)
        per.push_back({{"class", c.cls}, {"precision", c.precision}, {"recall", c.recall}, {"f1", c.f1}, {"support", c.support}});
    return {{"f1", m.f1}, {"precision", m.precision}, {"recall", m.recall}, {"accuracy", m.accuracy}, {"per_class", per}};
}

Metrics metrics_from(const json& j) {
    Metrics m;
    m.f1 = j.at("f1").get<double>();
    m.precision = j.at("precision").get<double>();
    m.recall = j.at("recall").get<double>();
    m.accuracy = j.at("accuracy").get<double>();
    for (const auto& c : j.at("per_class"))
        m.per_class.push_back({c.at("class").get<int>(), c.at("precision").get<double>(), c.at("recall").get<double>(),
                               c.at("f1").get<double>(), c.at("support").get<std::size_t>()});
    return m;
}

void render_json(std::ostream& out, const BenchmarkReport& rep) {
    json rows = json::array();
    for (const auto& r : rep.rows) {
        json curves = json::array();
        for (const auto& c : r.test_roc.curves) {
            json thr = json::array();
            for (double t : c.thresholds) thr.push_back(real_json(t));
            curves.push_back({{"class", c.cls},
                              {"present", c.present},
                              {"auc", real_json(c.auc)},
                              {"thresholds", thr},
                              {"fpr", c.fpr},
                              {"tpr", c.tpr}});
        }
        rows.push_back({{"model", r.spec.name()},
                        {"params", r.spec.params_text()},
                        {"spec", r.spec.to_line()},
                        {"train", metrics_json(r.train)},
                        {"test", metrics_json(r.test)},
                        {"cv",
                         {{"train_mean", r.cv_train_mean},
                          {"test_mean", r.cv_test_mean},
                          {"train_std", r.cv_train_std},
                          {"test_std", r.cv_test_std}}},
                        {"confusion", r.test_confusion.counts},
                        {"roc", curves},
                        {"macro_auc", real_json(r.test_roc.macro_auc)},
                        {"warnings", r.warnings}});
    }
    const json doc{{"dataset", rep.dataset},
                   {"samples", rep.samples},
                   {"features", rep.features},
                   {"classes", rep.classes},
                   {"class_names", rep.class_names},
                   {"protocol",
                    {{"split_frac", rep.protocol.split_frac},
                     {"k", rep.protocol.k},
                     {"seed", rep.protocol.seed},
                     {"stratify", rep.protocol.stratify}}},
                   {"warnings", rep.warnings},
                   {"rows", rows}};
    out << doc.dump(2) << '\n';
}

} // namespace

ReportFormat parse_report_format(std::string_view name) {
    if (name == "text" || name == "text-table" || name == "txt") return ReportFormat::TextTable;
    if (name == "csv") return ReportFormat::Csv;
    if (name == "markdown" || name == "md") return ReportFormat::Markdown;
    if (name == "plot-data" || name == "plot") return ReportFormat::PlotData;
    if (name == "json") return ReportFormat::Json;
    throw Error(ErrorKind::UnsupportedFormat, std::string(name));
}

void render_report(std::ostream& out, const BenchmarkReport& report, ReportFormat format) {
    switch (format) {
    case ReportFormat::TextTable: render_text(out, report); break;
    case ReportFormat::Csv: render_csv(out, report); break;
    case ReportFormat::Markdown: render_markdown(out, report); break;
    case ReportFormat::PlotData: render_plot_data(out, report); break;
    case ReportFormat::Json: render_json(out, report); break;
    }
}

std::vector<ReportCsvRow> parse_report_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || (line != kReportCsvHeader && line != std::string(kReportCsvHeader) + "\r"))
        throw Error(ErrorKind::MalformedRecord, "1", "not a benchmark csv");
    std::vector<ReportCsvRow> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto f = split_csv_record(line);
        if (f.size() != 12) throw Error(ErrorKind::MalformedRecord, std::to_string(line_no), "expected 12 fields");
        ReportCsvRow row{f[0], f[1], {}};
        for (std::size_t i = 0; i < 10; ++i) {
            auto v = parse_real(f[i + 2]);
            if (!v) throw Error(ErrorKind::MalformedRecord, std::to_string(line_no), "bad number");
            row.values[i] = *v;
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

BenchmarkReport read_report_json(std::istream& in) {
    const json doc = json::parse(in, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) throw Error(ErrorKind::MalformedRecord, "report", "not a JSON report");
    try {
        BenchmarkReport rep;
        rep.dataset = doc.at("dataset").get<std::string>();
        rep.samples = doc.at("samples").get<std::size_t>();
        rep.features = doc.at("features").get<std::size_t>();
        rep.classes = doc.at("classes").get<std::vector<int>>();
        rep.class_names = doc.at("class_names").get<std::vector<std::string>>();
        const auto& p = doc.at("protocol");
        rep.protocol.split_frac = p.at("split_frac").get<double>();
        rep.protocol.k = p.at("k").get<int>();
        rep.protocol.seed = p.at("seed").get<std::uint64_t>();
        rep.protocol.stratify = p.at("stratify").get<bool>();
        rep.warnings = doc.at("warnings").get<std::vector<std::string>>();
        for (const auto& r : doc.at("rows")) {
            BenchmarkRow row;
            row.spec = ModelSpec::parse_line(r.at("spec").get<std::string>());
            row.train = metrics_from(r.at("train"));
            row.test = metrics_from(r.at("test"));
            const auto& cv = r.at("cv");
            row.cv_train_mean = cv.at("train_mean").get<double>();
            row.cv_test_mean = cv.at("test_mean").get<double>();
            row.cv_train_std = cv.at("train_std").get<double>();
            row.cv_test_std = cv.at("test_std").get<double>();
            row.test_confusion.classes = rep.classes;
            row.test_confusion.counts = r.at("confusion").get<std::vector<std::vector<std::size_t>>>();
            for (const auto& c : r.at("roc")) {
                RocCurve curve;
                curve.cls = c.at("class").get<int>();
                curve.present = c.at("present").get<bool>();
                curve.auc = json_real(c.at("auc"), std::numeric_limits<double>::quiet_NaN());
                for (const auto& t : c.at("thresholds"))
                    curve.thresholds.push_back(json_real(t, std::numeric_limits<double>::infinity()));
                curve.fpr = c.at("fpr").get<std::vector<double>>();
                curve.tpr = c.at("tpr").get<std::vector<double>>();
                row.test_roc.curves.push_back(std::move(curve));
            }
            row.test_roc.macro_auc = json_real(r.at("macro_auc"), std::numeric_limits<double>::quiet_NaN());
            row.warnings = r.at("warnings").get<std::vector<std::string>>();
            rep.rows.push_back(std::move(row));
        }
        return rep;
    } catch (const json::exception& e) {
        throw Error(ErrorKind::MalformedRecord, "report", e.what());
    }
}

void render_evaluation(std::ostream& out, const Metrics& m, const ConfusionMatrix& cm, const RocResult& roc,
                       std::span<const std::string> class_names) {
    auto name = [&](std::size_t i) { return i < class_names.size() ? class_names[i] : std::to_string(cm.classes[i]); };
    out << "accuracy " << fixed(m.accuracy, 4) << '\n'
        << "weighted_precision " << fixed(m.precision, 4) << '\n'
        << "weighted_recall " << fixed(m.recall, 4) << '\n'
        << "weighted_f1 " << fixed(m.f1, 4) << '\n'
        << "macro_auc " << fixed(roc.macro_auc, 4) << "\n\n";
    out << std::left << std::setw(12) << "class" << std::setw(11) << "precision" << std::setw(9) << "recall"
        << std::setw(9) << "f1" << std::setw(9) << "support" << "auc\n";
    for (std::size_t i = 0; i < m.per_class.size(); ++i) {
        const auto& c = m.per_class[i];
        const bool has_roc = i < roc.curves.size() && roc.curves[i].present;
        out << std::setw(12) << name(i) << std::setw(11) << fixed(c.precision, 4) << std::setw(9) << fixed(c.recall, 4)
            << std::setw(9) << fixed(c.f1, 4) << std::setw(9) << c.support
            << (has_roc ? fixed(roc.curves[i].auc, 4) : std::string("absent")) << '\n';
    }
    out << "\nconfusion (rows true, columns predicted)\n" << std::setw(12) << "";
    for (std::size_t j = 0; j < cm.classes.size(); ++j) out << std::setw(11) << name(j);
    out << '\n';
    for (std::size_t i = 0; i < cm.counts.size(); ++i) {
        out << std::setw(12) << name(i);
        for (auto v : cm.counts[i]) out << std::setw(11) << v;
        out << '\n';
    }
}

} // namespace airshadow
