#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <sstream>

#include "airshadow/models.hpp"
#include "detail.hpp"

namespace airshadow {

namespace {

constexpr std::array<std::pair<ModelFamily, std::string_view>, 7> kFamilyNames{{
    {ModelFamily::DecisionTree, "decision_tree"},
    {ModelFamily::RandomForest, "random_forest"},
    {ModelFamily::Knn, "knn"},
    {ModelFamily::GaussianNb, "gaussian_nb"},
    {ModelFamily::LogisticRegression, "logistic_regression"},
    {ModelFamily::Mlp, "mlp"},
    {ModelFamily::Constant, "constant"},
}};

std::string join_ints(const std::vector<int>& v, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += sep;
        out += std::to_string(v[i]);
    }
    return out;
}

int to_int(const std::string& key, const std::string& value) {
    auto v = parse_real(value);
    if (!v || *v != std::floor(*v) || std::abs(*v) > 1e9) throw Error(ErrorKind::ConfigMismatch, key, "expected an integer");
    return static_cast<int>(*v);
}

double to_real(const std::string& key, const std::string& value) {
    auto v = parse_real(value);
    if (!v) throw Error(ErrorKind::ConfigMismatch, key, "expected a number");
    return *v;
}

bool to_bool(const std::string& key, const std::string& value) {
    if (value == "1" || value == "true" || value == "yes" || value == "on") return true;
    if (value == "0" || value == "false" || value == "no" || value == "off") return false;
    throw Error(ErrorKind::ConfigMismatch, key, "expected a boolean");
}

void set_field(ModelSpec& s, const std::string& key, const std::string& value) {
    if (key == "family")
        s.family = parse_model_family(value);
    else if (key == "max_depth")
        s.max_depth = to_int(key, value);
    else if (key == "n_estimators")
        s.n_estimators = to_int(key, value);
    else if (key == "k")
        s.k = to_int(key, value);
    else if (key == "hidden") {
        s.hidden.clear();
        std::string cleaned;
        for (char c : value)
            if (c != '[' && c != ']') cleaned += c;
        for (const auto& part : split_list(cleaned))
            if (!part.empty()) s.hidden.push_back(to_int(key, part));
    } else if (key == "learning_rate")
        s.learning_rate = to_real(key, value);
    else if (key == "epochs")
        s.epochs = to_int(key, value);
    else if (key == "batch_size")
        s.batch_size = to_int(key, value);
    else if (key == "l2")
        s.l2 = to_real(key, value);
    else if (key == "momentum")
        s.momentum = to_real(key, value);
    else if (key == "normalize")
        s.normalize = to_bool(key, value);
    else if (key == "bootstrap")
        s.bootstrap = to_bool(key, value);
    else if (key == "max_features")
        s.max_features = to_int(key, value);
    else if (key == "seed") {
        std::uint64_t seed = 0;
        auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), seed);
        if (ec != std::errc{} || ptr != value.data() + value.size())
            throw Error(ErrorKind::ConfigMismatch, key, "expected an unsigned integer");
        s.seed = seed;
    } else
        throw Error(ErrorKind::ConfigMismatch, key, "unknown model parameter");
}

} // namespace

std::string_view to_text(ModelFamily f) {
    for (const auto& [fam, name] : kFamilyNames)
        if (fam == f) return name;
    return "unknown";
}

ModelFamily parse_model_family(std::string_view text) {
    for (const auto& [fam, name] : kFamilyNames)
        if (name == text) return fam;
    throw Error(ErrorKind::ConfigMismatch, std::string(text), "unknown model family");
}

ModelSpec ModelSpec::resolved() const {
    ModelSpec r = *this;
    const bool lr = family == ModelFamily::LogisticRegression;
    const bool mlp = family == ModelFamily::Mlp;
    if (!r.learning_rate) r.learning_rate = lr ? 0.1 : 1e-3;
    if (!r.epochs) r.epochs = lr ? 5000 : 200;
    if (!r.l2) r.l2 = 1e-4;
    if (!r.normalize) r.normalize = family == ModelFamily::Knn || lr || mlp;
    return r;
}

void ModelSpec::validate() const {
    auto bad = [](const char* field) { throw Error(ErrorKind::ConfigMismatch, field, "must be positive"); };
    if (max_depth < 1) bad("max_depth");
    if (n_estimators < 1) bad("n_estimators");
    if (k < 1) bad("k");
    if (batch_size < 1) bad("batch_size");
    if (learning_rate && !(*learning_rate > 0)) bad("learning_rate");
    if (epochs && *epochs < 1) bad("epochs");
    if (l2 && !(*l2 >= 0)) throw Error(ErrorKind::ConfigMismatch, "l2", "must be non-negative");
    if (!(momentum >= 0 && momentum < 1)) throw Error(ErrorKind::ConfigMismatch, "momentum", "must be in [0, 1)");
    if (max_features < -1) bad("max_features");
    if (family == ModelFamily::Mlp) {
        if (hidden.empty()) throw Error(ErrorKind::ConfigMismatch, "hidden", "mlp needs at least one hidden layer");
        for (int h : hidden)
            if (h < 1) bad("hidden");
    }
}

std::string ModelSpec::name() const { return std::string(to_text(family)); }

std::string ModelSpec::params_text() const {
    switch (family) {
    case ModelFamily::DecisionTree: return "Max depth " + std::to_string(max_depth);
    case ModelFamily::RandomForest:
        return "Max estimator " + std::to_string(n_estimators) + " Max depth " + std::to_string(max_depth);
    case ModelFamily::Knn: return "Neighbour " + std::to_string(k);
    case ModelFamily::Mlp: return "Hidden [" + join_ints(hidden, ", ") + "]";
    default: return "-";
    }
}

std::string ModelSpec::to_line() const {
    std::ostringstream out;
    out << "family=" << to_text(family) << " max_depth=" << max_depth << " n_estimators=" << n_estimators
        << " k=" << k << " hidden=" << join_ints(hidden, ",") << " batch_size=" << batch_size
        << " momentum=" << format_real(momentum) << " bootstrap=" << (bootstrap ? 1 : 0)
        << " max_features=" << max_features << " seed=" << seed;
    if (learning_rate) out << " learning_rate=" << format_real(*learning_rate);
    if (epochs) out << " epochs=" << *epochs;
    if (l2) out << " l2=" << format_real(*l2);
    if (normalize) out << " normalize=" << (*normalize ? 1 : 0);
    return out.str();
}

ModelSpec ModelSpec::parse_line(std::string_view line) {
    ModelSpec s;
    std::istringstream in{std::string(line)};
    std::string tok;
    while (in >> tok) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos) throw Error(ErrorKind::ConfigMismatch, tok, "expected key=value");
        set_field(s, tok.substr(0, eq), tok.substr(eq + 1));
    }
    s.validate();
    return s;
}

ModelSpec ModelSpec::from_section(const ConfigSection& section) {
    ModelSpec s;
    if (!section.find("family")) throw Error(ErrorKind::ConfigMismatch, "family", "model section needs a family");
    for (const auto& [key, value] : section.entries) set_field(s, key, value);
    s.validate();
    return s;
}

std::vector<ModelSpec> benchmark_grid(std::uint64_t seed) {
    std::vector<ModelSpec> grid;
    auto add = [&](ModelFamily f, auto&& tweak) {
        ModelSpec s;
        s.family = f;
        s.seed = seed;
        tweak(s);
        grid.push_back(s);
    };
    add(ModelFamily::GaussianNb, [](ModelSpec&) {});
    for (int d : {10, 20, 30, 40}) add(ModelFamily::DecisionTree, [d](ModelSpec& s) { s.max_depth = d; });
    for (int k : {10, 20, 30, 40}) add(ModelFamily::Knn, [k](ModelSpec& s) { s.k = k; });
    add(ModelFamily::LogisticRegression, [](ModelSpec&) {});
    for (int n : {30, 50, 100})
        add(ModelFamily::RandomForest, [n](ModelSpec& s) {
            s.n_estimators = n;
            s.max_depth = 10;
        });
    for (auto h : {std::vector<int>{64, 64}, std::vector<int>{64, 64, 64}, std::vector<int>{128, 128},
                   std::vector<int>{128, 128, 128}})
        add(ModelFamily::Mlp, [h](ModelSpec& s) { s.hidden = h; });
    return grid;
}

std::vector<ModelSpec> specs_from_config(const Config& cfg) {
    std::vector<ModelSpec> out;
    for (const auto* sec : cfg.all("model")) out.push_back(ModelSpec::from_section(*sec));
    return out;
}

Normalizer Normalizer::fit(const Matrix& x) {
    Normalizer n;
    n.mean.assign(x.cols, 0.0);
    n.scale.assign(x.cols, 1.0);
    if (x.rows == 0) return n;
    for (std::size_t j = 0; j < x.cols; ++j) {
        double sum = 0.0;
        for (std::size_t i = 0; i < x.rows; ++i) sum += x(i, j);
        const double mean = sum / static_cast<double>(x.rows);
        double ss = 0.0;
        for (std::size_t i = 0; i < x.rows; ++i) ss += (x(i, j) - mean) * (x(i, j) - mean);
        const double sd = std::sqrt(ss / static_cast<double>(x.rows));
        n.mean[j] = mean;
        n.scale[j] = (sd > 0.0 && std::isfinite(sd)) ? sd : 1.0;
    }
    return n;
}

void Normalizer::apply(std::span<const double> in, std::span<double> out) const {
    for (std::size_t j = 0; j < in.size(); ++j) out[j] = (in[j] - mean[j]) / scale[j];
}

Matrix Normalizer::apply(const Matrix& x) const {
    Matrix out(x.rows, x.cols);
    for (std::size_t i = 0; i < x.rows; ++i) apply(x.row(i), out.row(i));
    return out;
}

const std::vector<double>& DecisionTree::leaf(std::span<const double> x) const {
    std::size_t i = 0;
    while (nodes[i].feature >= 0) {
        const auto& n = nodes[i];
        i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
    }
    return nodes[i].distribution;
}

int DecisionTree::depth() const {
    std::vector<int> d(nodes.size(), 0);
    int best = 0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        best = std::max(best, d[i]);
        if (nodes[i].feature >= 0) {
            d[static_cast<std::size_t>(nodes[i].left)] = d[i] + 1;
            d[static_cast<std::size_t>(nodes[i].right)] = d[i] + 1;
        }
    }
    return best;
}

std::vector<int> MlpModel::layer_sizes() const {
    std::vector<int> sizes;
    if (weights.empty()) return sizes;
    sizes.push_back(static_cast<int>(weights.front().cols()));
    for (const auto& w : weights) sizes.push_back(static_cast<int>(w.rows()));
    return sizes;
}

std::size_t argmax_first(std::span<const double> scores) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < scores.size(); ++i)
        if (scores[i] > scores[best]) best = i;
    return best;
}

void softmax_inplace(std::span<double> v) {
    if (v.empty()) return;
    const double m = *std::max_element(v.begin(), v.end());
    double sum = 0.0;
    for (double& e : v) {
        e = std::exp(e - m);
        sum += e;
    }
    for (double& e : v) e /= sum;
}

ModelFamily TrainedModel::family() const {
    return std::holds_alternative<ConstantModel>(params) ? ModelFamily::Constant : spec.family;
}

std::vector<double> TrainedModel::predict_scores(std::span<const double> x) const {
    if (x.size() != feature_count)
        throw Error(ErrorKind::SchemaMismatch, std::to_string(x.size()),
                    "expected " + std::to_string(feature_count) + " features");
    std::vector<double> buffer;
    std::span<const double> in = x;
    if (normalizer) {
        buffer.resize(x.size());
        normalizer->apply(x, buffer);
        in = buffer;
    }
    std::vector<double> out(classes.size(), 0.0);
    std::visit(
        [&](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, DecisionTree>) {
                const auto& d = m.leaf(in);
                std::copy(d.begin(), d.end(), out.begin());
            } else if constexpr (std::is_same_v<T, ForestModel>) {
                for (const auto& tree : m.trees) {
                    const auto& d = tree.leaf(in);
                    for (std::size_t c = 0; c < out.size(); ++c) out[c] += d[c];
                }
                for (double& v : out) v /= static_cast<double>(m.trees.size());
            } else if constexpr (std::is_same_v<T, KnnModel>) {
                detail::knn_scores(m, in, out);
            } else if constexpr (std::is_same_v<T, GaussianNbModel>) {
                detail::gnb_scores(m, in, out);
            } else if constexpr (std::is_same_v<T, LogisticModel>) {
                detail::logistic_scores(m, in, out);
            } else if constexpr (std::is_same_v<T, MlpModel>) {
                detail::mlp_scores(m, in, out);
            } else {
                out.assign(classes.size(), 0.0);
                out[0] = 1.0;
            }
        },
        params);
    return out;
}

int TrainedModel::predict(std::span<const double> x) const {
    const auto scores = predict_scores(x);
    return classes[argmax_first(scores)];
}

Matrix TrainedModel::predict_scores_batch(const Matrix& x) const {
    if (x.cols != feature_count && x.rows > 0)
        throw Error(ErrorKind::SchemaMismatch, std::to_string(x.cols),
                    "expected " + std::to_string(feature_count) + " features");
    Matrix out(x.rows, classes.size());
    const auto n = static_cast<std::ptrdiff_t>(x.rows);
#pragma omp parallel for schedule(dynamic, 16)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const auto s = predict_scores(x.row(static_cast<std::size_t>(i)));
        std::copy(s.begin(), s.end(), out.row(static_cast<std::size_t>(i)).begin());
    }
    return out;
}

std::vector<int> TrainedModel::predict_batch(const Matrix& x) const {
    const Matrix scores = predict_scores_batch(x);
    std::vector<int> out(x.rows);
    for (std::size_t i = 0; i < x.rows; ++i) out[i] = classes[argmax_first(scores.row(i))];
    return out;
}

TrainedModel train(const ModelSpec& spec_in, const Matrix& x, std::span<const int> y) {
    spec_in.validate();
    if (x.rows == 0 || y.empty()) throw Error(ErrorKind::EmptyDataset, "rows", "no training rows");
    if (x.rows != y.size())
        throw Error(ErrorKind::LengthMismatch, "y", std::to_string(x.rows) + " rows vs " + std::to_string(y.size()) + " labels");
    for (std::size_t i = 0; i < x.rows; ++i)
        for (std::size_t j = 0; j < x.cols; ++j)
            if (!std::isfinite(x(i, j)))
                throw Error(ErrorKind::NonFiniteFeature, "row " + std::to_string(i) + " col " + std::to_string(j));

    TrainedModel model;
    model.spec = spec_in.resolved();
    model.feature_count = x.cols;
    model.classes.assign(y.begin(), y.end());
    std::sort(model.classes.begin(), model.classes.end());
    model.classes.erase(std::unique(model.classes.begin(), model.classes.end()), model.classes.end());

    if (model.classes.size() == 1) {
        model.params = ConstantModel{};
        model.warnings.push_back("SingleClass: training data holds only class " + std::to_string(model.classes[0]) +
                                 "; using a constant predictor");
        return model;
    }

    std::vector<int> idx(y.size());
    for (std::size_t i = 0; i < y.size(); ++i)
        idx[i] = static_cast<int>(std::lower_bound(model.classes.begin(), model.classes.end(), y[i]) - model.classes.begin());
    const int c = static_cast<int>(model.classes.size());

    const Matrix* data = &x;
    Matrix scaled;
    if (*model.spec.normalize) {
        model.normalizer = Normalizer::fit(x);
        scaled = model.normalizer->apply(x);
        data = &scaled;
    }

    switch (model.spec.family) {
    case ModelFamily::DecisionTree: model.params = detail::fit_tree(model.spec, *data, idx, c); break;
    case ModelFamily::RandomForest: model.params = detail::fit_forest(model.spec, *data, idx, c); break;
    case ModelFamily::Knn: model.params = detail::fit_knn(model.spec, *data, idx); break;
    case ModelFamily::GaussianNb: model.params = detail::fit_gnb(*data, idx, c); break;
    case ModelFamily::LogisticRegression: model.params = detail::fit_logistic(model.spec, *data, idx, c); break;
    case ModelFamily::Mlp: model.params = detail::fit_mlp(model.spec, *data, idx, c); break;
    case ModelFamily::Constant: throw Error(ErrorKind::ConfigMismatch, "family", "constant is not trainable");
    }
    return model;
}

} // namespace airshadow
