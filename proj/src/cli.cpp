#include "airshadow/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "airshadow/collector.hpp"
#include "airshadow/eval.hpp"
#include "airshadow/features.hpp"
#include "airshadow/ingest.hpp"
#include "airshadow/models.hpp"
#include "airshadow/pipeline.hpp"
#include "airshadow/simulator.hpp"

namespace airshadow {

namespace fs = std::filesystem;

namespace {

constexpr const char* kSynopsis =
    "usage: airshadow <command> [options]\n"
    "commands:\n"
    "  simulate   --scenario FILE | --preset NAME  [--seed N] [--out DIR] [--dataset FILE]\n"
    "  collect    [--bind HOST:PORT] [--data-dir DIR] [--strict]\n"
    "  ingest     --logs PATH... --annotations FILE --out FILE [--features FILE] [--devices a,b]\n"
    "  train      --dataset FILE --spec FILE --out FILE [--seed N]\n"
    "  predict    --model FILE --logs PATH... [--stride SECONDS] [--out FILE]\n"
    "  evaluate   --model FILE --dataset FILE\n"
    "  benchmark  --dataset FILE [--specs FILE] [--seed N] --out FILE [--json FILE]\n"
    "  report     --in REPORT.json --format text|csv|markdown|plot-data|json [--out FILE]\n"
    "run `airshadow <command> --help` for details\n";

std::ofstream open_out(const fs::path& path) {
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, path.string(), "cannot open for writing");
    return out;
}

std::ifstream open_in(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, path.string(), "cannot open");
    return in;
}

FeatureConfig load_features(const std::string& path) {
    if (path.empty()) return FeatureConfig{};
    auto cfg = FeatureConfig::from_config(load_config(path));
    cfg.validate();
    return cfg;
}

/// Files named directly, plus *.ndjson / *.csv found under directories,
/// in sorted order.
std::vector<std::string> expand_logs(const std::vector<std::string>& paths) {
    std::vector<std::string> out;
    for (const auto& p : paths) {
        if (fs::is_directory(p)) {
            std::vector<std::string> found;
            for (const auto& e : fs::recursive_directory_iterator(p)) {
                if (!e.is_regular_file()) continue;
                const auto ext = e.path().extension();
                if ((ext == ".ndjson" || ext == ".jsonl" || ext == ".csv") && e.path().filename() != "annotations.csv" &&
                    e.path().filename() != "truth.csv")
                    found.push_back(e.path().string());
            }
            std::sort(found.begin(), found.end());
            out.insert(out.end(), found.begin(), found.end());
        } else if (fs::exists(p)) {
            out.push_back(p);
        } else {
            throw Error(ErrorKind::Io, p, "no such file or directory");
        }
    }
    if (out.empty()) throw Error(ErrorKind::EmptyInput, "logs", "no telemetry files found");
    return out;
}

struct LoadedLogs {
    std::vector<PollutantSample> samples;
    std::size_t issues = 0;
};

LoadedLogs load_logs(const std::vector<std::string>& files, bool strict, std::ostream& err) {
    LoadedLogs out;
    for (const auto& f : files) {
        auto log = read_sample_file(f, strict);
        for (const auto& issue : log.issues)
            if (out.issues++ < 5) err << "warning: " << f << ":" << issue.line << ": " << issue.reason << '\n';
        out.samples.insert(out.samples.end(), std::make_move_iterator(log.samples.begin()),
                           std::make_move_iterator(log.samples.end()));
    }
    if (out.issues > 5) err << "warning: " << out.issues << " records skipped in total\n";
    return out;
}

std::vector<DeviceId> devices_from(const std::string& list, const std::vector<PollutantSample>& samples) {
    std::vector<DeviceId> out;
    if (!list.empty()) {
        for (const auto& d : split_list(list)) out.emplace_back(d);
        return out;
    }
    std::set<DeviceId> seen;
    for (const auto& s : samples) seen.insert(s.device);
    return {seen.begin(), seen.end()};
}

std::vector<DeviceId> devices_from_names(const std::vector<std::string>& names) {
    std::vector<DeviceId> out;
    for (const auto& n : names) {
        const auto last = n.rfind('.');
        const auto mid = last == std::string::npos || last == 0 ? std::string::npos : n.rfind('.', last - 1);
        if (mid == std::string::npos) throw Error(ErrorKind::SchemaMismatch, n, "not a <device>.<pollutant>.<fn> name");
        DeviceId d(n.substr(0, mid));
        if (std::find(out.begin(), out.end(), d) == out.end()) out.push_back(d);
    }
    return out;
}

std::vector<int> labels_as_ints(const std::vector<ActivityLabel>& labels) {
    std::vector<int> y(labels.size());
    std::transform(labels.begin(), labels.end(), y.begin(), [](ActivityLabel l) { return static_cast<int>(l); });
    return y;
}

std::string class_text(int c) {
    if (c >= 0 && static_cast<std::size_t>(c) < kLabelCount) return std::string(to_text(static_cast<ActivityLabel>(c)));
    return std::to_string(c);
}

LabeledDataset load_dataset(const std::string& path) {
    auto in = open_in(path);
    auto ds = read_dataset_csv(in);
    if (ds.size() == 0) throw Error(ErrorKind::EmptyDataset, path, "dataset has no rows");
    return ds;
}

void write_dataset(const std::string& path, const LabeledDataset& ds, const std::string& feature_text) {
    {
        auto out = open_out(path);
        write_dataset_csv(out, ds);
        if (!out) throw Error(ErrorKind::Io, path, "write failed");
    }
    std::map<std::string, std::size_t> counts;
    for (auto l : ds.labels) ++counts[std::string(to_text(l))];
    const nlohmann::json meta{{"sources", ds.provenance.sources},
                              {"seed", ds.provenance.seed},
                              {"config_digest", ds.provenance.config_digest},
                              {"rows", ds.size()},
                              {"features", ds.schema.size()},
                              {"label_counts", counts},
                              {"skipped",
                               {{"out_of_bounds", ds.skipped.out_of_bounds},
                                {"too_many_missing", ds.skipped.too_many_missing}}},
                              {"feature_config", feature_text}};
    auto out = open_out(path + ".meta.json");
    out << meta.dump(2) << '\n';
}

struct Context {
    std::ostream& out;
    std::ostream& err;
};

// ---- simulate -------------------------------------------------------------

struct SimulateArgs {
    std::string scenario, preset, out_dir, dataset, features;
    std::uint64_t seed = 0;
    bool trailing = false;
    std::size_t chunk = 86400;
};

int cmd_simulate(const SimulateArgs& a, Context& ctx) {
    if (a.scenario.empty() == a.preset.empty())
        throw CLI::ValidationError("simulate", "give exactly one of --scenario or --preset");
    if (a.out_dir.empty() && a.dataset.empty()) throw CLI::ValidationError("simulate", "give --out and/or --dataset");
    const Scenario sc = a.scenario.empty() ? preset_scenario(parse_preset(a.preset))
                                           : scenario_from_config(load_config(a.scenario), substream(a.seed, "scenario-plan"));
    sc.validate();
    if (!a.out_dir.empty()) {
        const auto files = write_telemetry(sc, a.seed, a.out_dir, a.chunk);
        auto cfg = open_out(fs::path(a.out_dir) / "scenario.cfg");
        write_scenario(cfg, sc);
        ctx.out << "wrote " << files.samples << " samples from " << files.logs.size() << " devices and "
                << sc.annotations().size() << " annotations to " << a.out_dir << '\n';
    }
    if (!a.dataset.empty()) {
        DatasetBuild build;
        build.window.features = load_features(a.features);
        build.window.placement = a.trailing ? WindowPlacement::Trailing : WindowPlacement::Centered;
        build.chunk_cells = a.chunk;
        auto ds = simulate_dataset(sc, a.seed, build);
        ds.provenance.sources = {a.scenario.empty() ? "preset:" + a.preset : a.scenario};
        write_dataset(a.dataset, ds, build.window.features.to_config_text());
        ctx.out << "dataset " << a.dataset << ": " << ds.size() << " windows x " << ds.schema.size() << " features, "
                << ds.skipped.total() << " skipped\n";
    }
    return kExitOk;
}

// ---- collect --------------------------------------------------------------

struct CollectArgs {
    std::string bind = "0.0.0.0:7007";
    std::string data_dir = "data";
    bool strict = false;
    std::size_t max_line = 4096;
};

int cmd_collect(const CollectArgs& a, Context& ctx) {
    CollectorConfig cfg;
    std::tie(cfg.bind_address, cfg.port) = parse_bind(a.bind);
    cfg.data_dir = a.data_dir;
    cfg.apply_environment();
    cfg.strict = a.strict;
    cfg.max_line = a.max_line;
    cfg.handle_signals = true;
    Collector collector(cfg);
    ctx.out << "listening on " << collector.address() << " data-dir " << cfg.data_dir.string() << std::endl;
    collector.run();
    ctx.out << "stopped: " << collector.acks_ok() << " ok, " << collector.acks_err() << " rejected" << std::endl;
    return kExitOk;
}

// ---- ingest ---------------------------------------------------------------

struct IngestArgs {
    std::vector<std::string> logs;
    std::string annotations, out, features, devices;
    bool trailing = false;
    bool strict = false;
};

int cmd_ingest(const IngestArgs& a, Context& ctx) {
    const auto files = expand_logs(a.logs);
    auto in_ann = open_in(a.annotations);
    const auto annotations = parse_annotations(in_ann);
    const auto logs = load_logs(files, a.strict, ctx.err);
    const auto devices = devices_from(a.devices, logs.samples);
    std::vector<PollutantSample> kept;
    kept.reserve(logs.samples.size());
    for (const auto& s : logs.samples)
        if (std::find(devices.begin(), devices.end(), s.device) != devices.end()) kept.push_back(s);
    const auto aligned = align_series(kept, devices, 1.0);
    WindowConfig wc;
    wc.features = load_features(a.features);
    wc.placement = a.trailing ? WindowPlacement::Trailing : WindowPlacement::Centered;
    auto ds = build_labeled_windows(aligned, annotations, wc);
    ds.provenance.sources = files;
    ds.provenance.sources.push_back(a.annotations);
    write_dataset(a.out, ds, wc.features.to_config_text());
    ctx.out << "dataset " << a.out << ": " << ds.size() << " windows x " << ds.schema.size() << " features from "
            << devices.size() << " devices; skipped " << ds.skipped.out_of_bounds << " out of bounds, "
            << ds.skipped.too_many_missing << " with too many missing cells\n";
    return kExitOk;
}

// ---- train ----------------------------------------------------------------

struct TrainArgs {
    std::string dataset, spec, out;
    std::vector<std::string> set;
    std::size_t index = 0;
    std::uint64_t seed = 0;
    bool seed_given = false;
};

ModelSpec resolve_spec(const TrainArgs& a) {
    ModelSpec spec;
    if (!a.spec.empty()) {
        const auto specs = specs_from_config(load_config(a.spec));
        if (specs.empty()) throw Error(ErrorKind::ConfigMismatch, a.spec, "no [model] section");
        if (a.index >= specs.size()) throw Error(ErrorKind::ConfigMismatch, "index", "spec file has " + std::to_string(specs.size()) + " models");
        spec = specs[a.index];
    }
    if (!a.set.empty()) {
        std::string line = spec.to_line();
        for (const auto& kv : a.set) line += " " + kv;
        spec = ModelSpec::parse_line(line);
    }
    if (a.seed_given) spec.seed = substream(a.seed, "model");
    return spec;
}

int cmd_train(const TrainArgs& a, Context& ctx) {
    const auto ds = load_dataset(a.dataset);
    const ModelSpec spec = resolve_spec(a);
    const auto y = labels_as_ints(ds.labels);
    TrainedModel model = train(spec, ds.features, y);
    model.feature_names = ds.schema.names;
    for (const auto& w : model.warnings) ctx.err << "warning: " << w << '\n';
    auto out = open_out(a.out);
    save_model(out, model);
    const auto pred = model.predict_batch(ds.features);
    std::size_t ok = 0;
    for (std::size_t i = 0; i < y.size(); ++i) ok += pred[i] == y[i];
    ctx.out << "trained " << spec.name() << " (" << spec.params_text() << ") on " << ds.size()
            << " windows; training accuracy " << static_cast<double>(ok) / static_cast<double>(y.size()) << '\n';
    return kExitOk;
}

// ---- predict --------------------------------------------------------------

struct PredictArgs {
    std::string model, out, features, devices;
    std::vector<std::string> logs;
    double stride = 60.0;
    bool strict = false;
};

int cmd_predict(const PredictArgs& a, Context& ctx) {
    if (!(a.stride > 0)) throw CLI::ValidationError("--stride", "must be positive");
    auto in_model = open_in(a.model);
    const TrainedModel model = load_model(in_model);
    const FeatureConfig fc = load_features(a.features);
    std::vector<DeviceId> devices;
    if (!a.devices.empty())
        for (const auto& d : split_list(a.devices)) devices.emplace_back(d);
    else if (!model.feature_names.empty())
        devices = devices_from_names(model.feature_names);
    else
        throw Error(ErrorKind::SchemaMismatch, a.model, "model has no feature names; pass --devices");
    const auto schema = feature_schema(devices, fc);
    if (!model.feature_names.empty() && schema.names != model.feature_names)
        throw Error(ErrorKind::SchemaMismatch, a.model, "feature names differ from the telemetry schema");

    const auto logs = load_logs(expand_logs(a.logs), a.strict, ctx.err);
    std::vector<PollutantSample> kept;
    for (const auto& s : logs.samples)
        if (std::find(devices.begin(), devices.end(), s.device) != devices.end()) kept.push_back(s);
    const auto aligned = align_series(kept, devices, 1.0);
    const std::size_t cells = window_cells(fc.tau, aligned.step());
    const auto stride_cells = static_cast<std::size_t>(std::max(1.0, std::round(a.stride / aligned.step())));
    std::vector<std::size_t> starts;
    for (std::size_t s = 0; s + cells <= aligned.length(); s += stride_cells) starts.push_back(s);
    const auto batch = extract_batch(aligned, starts, fc);

    std::ofstream file;
    std::ostream* out = &ctx.out;
    if (!a.out.empty()) {
        file = open_out(a.out);
        out = &file;
    }
    *out << "window_start,window_end,label,score";
    for (int c : model.classes) *out << ",p_" << class_text(c);
    *out << '\n';
    std::size_t skipped = 0;
    Matrix rows(0, schema.size());
    std::vector<std::size_t> which;
    for (std::size_t w = 0; w < starts.size(); ++w) {
        if (batch.status[w] != WindowStatus::Ok) {
            ++skipped;
            continue;
        }
        rows.append_row(batch.values.row(w));
        which.push_back(w);
    }
    const Matrix scores = model.predict_scores_batch(rows);
    for (std::size_t i = 0; i < which.size(); ++i) {
        const auto best = argmax_first(scores.row(i));
        const double t = aligned.time_at(starts[which[i]]);
        *out << format_real(t) << ',' << format_real(t + fc.tau) << ',' << class_text(model.classes[best]) << ','
             << format_real(scores(i, best));
        for (double s : scores.row(i)) *out << ',' << format_real(s);
        *out << '\n';
    }
    if (skipped > 0) ctx.err << "skipped " << skipped << " windows with too many missing cells\n";
    return kExitOk;
}

// ---- evaluate -------------------------------------------------------------

struct EvaluateArgs {
    std::string model, dataset;
};

int cmd_evaluate(const EvaluateArgs& a, Context& ctx) {
    auto in_model = open_in(a.model);
    const TrainedModel model = load_model(in_model);
    const auto ds = load_dataset(a.dataset);
    if (!model.feature_names.empty() && model.feature_names != ds.schema.names)
        throw Error(ErrorKind::SchemaMismatch, a.dataset, "dataset columns differ from the model's features");
    const auto y = labels_as_ints(ds.labels);
    std::vector<int> classes = model.classes;
    for (int c : y)
        if (std::find(classes.begin(), classes.end(), c) == classes.end()) classes.push_back(c);
    std::sort(classes.begin(), classes.end());
    const Matrix raw = model.predict_scores_batch(ds.features);
    Matrix scores(raw.rows, classes.size());
    std::vector<int> pred(raw.rows);
    for (std::size_t i = 0; i < raw.rows; ++i) {
        for (std::size_t c = 0; c < model.classes.size(); ++c) {
            const auto col = static_cast<std::size_t>(std::find(classes.begin(), classes.end(), model.classes[c]) - classes.begin());
            scores(i, col) = raw(i, c);
        }
        pred[i] = model.classes[argmax_first(raw.row(i))];
    }
    const auto cm = confusion_matrix(y, pred, classes);
    const auto metrics = weighted_metrics(cm);
    const auto roc = roc_ovr(y, scores, classes);
    std::vector<std::string> names;
    for (int c : classes) names.push_back(class_text(c));
    render_evaluation(ctx.out, metrics, cm, roc, names);
    return kExitOk;
}

// ---- benchmark ------------------------------------------------------------

struct BenchmarkArgs {
    std::string dataset, specs, out, json, format;
    std::uint64_t seed = 0;
    int k = 5;
    double split = 0.7;
    bool no_stratify = false;
};

ReportFormat format_for(const std::string& explicit_format, const std::string& path) {
    if (!explicit_format.empty()) return parse_report_format(explicit_format);
    const auto ext = fs::path(path).extension().string();
    if (ext == ".md" || ext == ".markdown") return ReportFormat::Markdown;
    if (ext == ".csv") return ReportFormat::Csv;
    if (ext == ".json") return ReportFormat::Json;
    return ReportFormat::TextTable;
}

int cmd_benchmark(const BenchmarkArgs& a, Context& ctx) {
    const auto ds = load_dataset(a.dataset);
    const auto specs = a.specs.empty() ? benchmark_grid() : specs_from_config(load_config(a.specs));
    if (specs.empty()) throw Error(ErrorKind::ConfigMismatch, a.specs, "no [model] sections");
    Protocol protocol{a.split, a.k, a.seed, !a.no_stratify};
    const auto y = labels_as_ints(ds.labels);
    auto report = run_benchmark(ds.features, y, specs, protocol);
    report.dataset = fs::path(a.dataset).filename().string();
    for (int c : report.classes) report.class_names.push_back(class_text(c));
    for (const auto& w : report.warnings) ctx.err << "warning: " << w << '\n';
    {
        auto out = open_out(a.out);
        render_report(out, report, format_for(a.format, a.out));
    }
    if (!a.json.empty()) {
        auto out = open_out(a.json);
        render_report(out, report, ReportFormat::Json);
    }
    render_report(ctx.out, report, ReportFormat::TextTable);
    return kExitOk;
}

// ---- report ---------------------------------------------------------------

struct ReportArgs {
    std::string in, format = "text", out;
};

int cmd_report(const ReportArgs& a, Context& ctx) {
    auto in = open_in(a.in);
    const auto report = read_report_json(in);
    const auto fmt = parse_report_format(a.format);
    if (a.out.empty()) {
        render_report(ctx.out, report, fmt);
    } else {
        auto out = open_out(a.out);
        render_report(out, report, fmt);
    }
    return kExitOk;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Context ctx{out, err};
    CLI::App app{"Activity inference from indoor air-quality telemetry", "airshadow"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all");

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "Simulate a scenario into per-device telemetry and annotations");
    simulate->add_option("--scenario", sim.scenario, "Scenario file");
    simulate->add_option("--preset", sim.preset, "Built-in scenario: lab, exam, ac, eating");
    simulate->add_option("--seed", sim.seed, "Master seed");
    simulate->add_option("--out", sim.out_dir, "Output directory for ndjson logs and annotations.csv");
    simulate->add_option("--dataset", sim.dataset, "Also write the labeled feature dataset here");
    simulate->add_option("--features", sim.features, "Feature config file for --dataset");
    simulate->add_flag("--trailing", sim.trailing, "Trailing instead of centered windows");
    simulate->add_option("--chunk", sim.chunk, "Cells simulated per chunk")->check(CLI::PositiveNumber);

    CollectArgs col;
    auto* collect = app.add_subcommand("collect", "Run the telemetry collector");
    collect->add_option("--bind", col.bind, "HOST:PORT (port 0 picks a free one)");
    collect->add_option("--data-dir", col.data_dir, "Log directory (AIR_DATA_DIR overrides)");
    collect->add_flag("--strict", col.strict, "Reject records with any invalid reading");
    collect->add_option("--max-line", col.max_line, "Maximum record length in bytes")->check(CLI::PositiveNumber);

    IngestArgs ing;
    auto* ingest = app.add_subcommand("ingest", "Turn logs and annotations into a labeled feature dataset");
    ingest->add_option("--logs", ing.logs, "Telemetry files or directories")->required();
    ingest->add_option("--annotations", ing.annotations, "Annotation csv")->required();
    ingest->add_option("--out", ing.out, "Dataset csv")->required();
    ingest->add_option("--features", ing.features, "Feature config file");
    ingest->add_option("--devices", ing.devices, "Comma-separated device order (default: sorted ids)");
    ingest->add_flag("--trailing", ing.trailing, "Trailing instead of centered windows");
    ingest->add_flag("--strict", ing.strict, "Abort on the first malformed record");

    TrainArgs tr;
    auto* train_cmd = app.add_subcommand("train", "Fit one model on a dataset");
    train_cmd->add_option("--dataset", tr.dataset, "Dataset csv")->required();
    train_cmd->add_option("--spec", tr.spec, "Model spec file ([model] sections)");
    train_cmd->add_option("--index", tr.index, "Which [model] section to use");
    train_cmd->add_option("--set", tr.set, "Override a parameter, key=value");
    auto* seed_opt = train_cmd->add_option("--seed", tr.seed, "Master seed");
    train_cmd->add_option("--out", tr.out, "Model file")->required();

    PredictArgs pr;
    auto* predict = app.add_subcommand("predict", "Label sliding windows of telemetry");
    predict->add_option("--model", pr.model, "Model file")->required();
    predict->add_option("--logs", pr.logs, "Telemetry files or directories")->required();
    predict->add_option("--stride", pr.stride, "Seconds between window starts");
    predict->add_option("--features", pr.features, "Feature config file (must match training)");
    predict->add_option("--devices", pr.devices, "Device order when the model has no feature names");
    predict->add_option("--out", pr.out, "Output csv (default stdout)");
    predict->add_flag("--strict", pr.strict, "Abort on the first malformed record");

    EvaluateArgs ev;
    auto* evaluate = app.add_subcommand("evaluate", "Score a model on a labeled dataset");
    evaluate->add_option("--model", ev.model, "Model file")->required();
    evaluate->add_option("--dataset", ev.dataset, "Dataset csv")->required();

    BenchmarkArgs bm;
    auto* benchmark = app.add_subcommand("benchmark", "Run the model grid with split and cross-validation");
    benchmark->add_option("--dataset", bm.dataset, "Dataset csv")->required();
    benchmark->add_option("--specs", bm.specs, "Model spec file (default: built-in grid)");
    benchmark->add_option("--seed", bm.seed, "Master seed");
    benchmark->add_option("--k", bm.k, "Cross-validation folds");
    benchmark->add_option("--split", bm.split, "Training fraction of the random split");
    benchmark->add_flag("--no-stratify", bm.no_stratify, "Plain split and folds");
    benchmark->add_option("--out", bm.out, "Report file; format from extension or --format")->required();
    benchmark->add_option("--format", bm.format, "text, csv, markdown, plot-data or json");
    benchmark->add_option("--json", bm.json, "Also write the full report as json");

    ReportArgs rp;
    auto* report = app.add_subcommand("report", "Render a saved json report");
    report->add_option("--in", rp.in, "Report json")->required();
    report->add_option("--format", rp.format, "text, csv, markdown, plot-data or json");
    report->add_option("--out", rp.out, "Output file (default stdout)");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
        tr.seed_given = seed_opt->count() > 0;
        if (simulate->parsed()) return cmd_simulate(sim, ctx);
        if (collect->parsed()) return cmd_collect(col, ctx);
        if (ingest->parsed()) return cmd_ingest(ing, ctx);
        if (train_cmd->parsed()) return cmd_train(tr, ctx);
        if (predict->parsed()) return cmd_predict(pr, ctx);
        if (evaluate->parsed()) return cmd_evaluate(ev, ctx);
        if (benchmark->parsed()) return cmd_benchmark(bm, ctx);
        if (report->parsed()) return cmd_report(rp, ctx);
        err << kSynopsis;
        return kExitUsage;
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n' << kSynopsis;
        return kExitUsage;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitData;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        return kExitInternal;
    }
}

int dispatch(int argc, const char* const* argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run_cli(args, std::cout, std::cerr);
}

} // namespace airshadow
