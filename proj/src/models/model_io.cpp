#include <sstream>

#include "detail.hpp"

namespace airshadow {

namespace {

constexpr std::string_view kMagic = "airshadow-model";
constexpr int kVersion = 1;

void write_reals(std::ostream& out, const double* v, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out << ' ' << format_real(v[i]);
}

void write_tree(std::ostream& out, const DecisionTree& t) {
    out << "tree " << t.nodes.size() << '\n';
    for (const auto& n : t.nodes) {
        out << n.feature << ' ' << format_real(n.threshold) << ' ' << n.left << ' ' << n.right;
        write_reals(out, n.distribution.data(), n.distribution.size());
        out << '\n';
    }
}

void write_matrix_rows(std::ostream& out, const Eigen::MatrixXd& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) out << (j ? " " : "") << format_real(m(i, j));
        out << '\n';
    }
}

class Reader {
public:
    explicit Reader(std::istream& in) : in_(in) {}

    std::vector<std::string> next() {
        std::string line;
        if (!std::getline(in_, line)) throw corrupt("unexpected end of file");
        ++line_no_;
        std::istringstream ss(line);
        std::vector<std::string> tokens;
        for (std::string t; ss >> t;) tokens.push_back(t);
        return tokens;
    }

    std::vector<std::string> expect(std::string_view tag, std::size_t min_tokens) {
        auto t = next();
        if (t.empty() || t[0] != tag || t.size() < min_tokens) throw corrupt("expected '" + std::string(tag) + "'");
        return t;
    }

    Error corrupt(const std::string& what) const {
        return Error(ErrorKind::CorruptModel, "line " + std::to_string(line_no_), what);
    }

    double real(const std::string& s) const {
        auto v = parse_real(s);
        if (!v) throw corrupt("bad number '" + s + "'");
        return *v;
    }

    long integer(const std::string& s, long lo, long hi) const {
        const double v = real(s);
        if (v != static_cast<double>(static_cast<long>(v)) || v < static_cast<double>(lo) || v > static_cast<double>(hi))
            throw corrupt("bad integer '" + s + "'");
        return static_cast<long>(v);
    }

    std::vector<double> reals(const std::vector<std::string>& t, std::size_t from, std::size_t count) const {
        if (t.size() != from + count) throw corrupt("expected " + std::to_string(count) + " values");
        std::vector<double> v(count);
        for (std::size_t i = 0; i < count; ++i) v[i] = real(t[from + i]);
        return v;
    }

    Eigen::MatrixXd matrix(long rows, long cols) {
        Eigen::MatrixXd m(rows, cols);
        for (long i = 0; i < rows; ++i) {
            const auto v = reals(next(), 0, static_cast<std::size_t>(cols));
            for (long j = 0; j < cols; ++j) m(i, j) = v[static_cast<std::size_t>(j)];
        }
        return m;
    }

private:
    std::istream& in_;
    std::size_t line_no_ = 0;
};

constexpr long kMaxCount = 100'000'000;

DecisionTree read_tree(Reader& r, std::size_t classes, std::size_t features) {
    const auto head = r.expect("tree", 2);
    const long count = r.integer(head[1], 1, kMaxCount);
    DecisionTree t;
    t.nodes.resize(static_cast<std::size_t>(count));
    for (auto& n : t.nodes) {
        const auto tok = r.next();
        if (tok.size() != 4 + classes) throw r.corrupt("bad tree node");
        n.feature = static_cast<int>(r.integer(tok[0], -1, static_cast<long>(features) - 1));
        n.threshold = r.real(tok[1]);
        n.left = static_cast<int>(r.integer(tok[2], -1, count - 1));
        n.right = static_cast<int>(r.integer(tok[3], -1, count - 1));
        if (n.feature >= 0 && (n.left < 0 || n.right < 0)) throw r.corrupt("split node without children");
        n.distribution = r.reals(tok, 4, classes);
    }
    // Children must point forward so traversal terminates.
    for (std::size_t i = 0; i < t.nodes.size(); ++i)
        if (t.nodes[i].feature >= 0 &&
            (t.nodes[i].left <= static_cast<int>(i) || t.nodes[i].right <= static_cast<int>(i)))
            throw r.corrupt("tree node links backwards");
    return t;
}

} // namespace

void save_model(std::ostream& out, const TrainedModel& m) {
    out << kMagic << " v" << kVersion << '\n';
    out << "family " << to_text(m.family()) << '\n';
    out << "spec " << m.spec.to_line() << '\n';
    out << "classes " << m.classes.size();
    for (int c : m.classes) out << ' ' << c;
    out << '\n';
    out << "features " << m.feature_count << '\n';
    out << "names " << m.feature_names.size();
    for (const auto& n : m.feature_names) out << ' ' << n;
    out << '\n';
    out << "normalizer " << (m.normalizer ? 1 : 0) << '\n';
    if (m.normalizer) {
        out << "mean";
        write_reals(out, m.normalizer->mean.data(), m.normalizer->mean.size());
        out << "\nscale";
        write_reals(out, m.normalizer->scale.data(), m.normalizer->scale.size());
        out << '\n';
    }
    std::visit(
        [&](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, DecisionTree>) {
                write_tree(out, p);
            } else if constexpr (std::is_same_v<T, ForestModel>) {
                out << "forest " << p.trees.size() << '\n';
                for (const auto& t : p.trees) write_tree(out, t);
            } else if constexpr (std::is_same_v<T, KnnModel>) {
                out << "knn " << p.k << ' ' << p.points.rows << ' ' << p.points.cols << '\n';
                for (std::size_t i = 0; i < p.points.rows; ++i) {
                    out << p.labels[i];
                    write_reals(out, p.points.row(i).data(), p.points.cols);
                    out << '\n';
                }
            } else if constexpr (std::is_same_v<T, GaussianNbModel>) {
                out << "gnb " << p.mean.rows() << ' ' << p.mean.cols() << '\n';
                out << "prior";
                write_reals(out, p.log_prior.data(), static_cast<std::size_t>(p.log_prior.size()));
                out << '\n';
                write_matrix_rows(out, p.mean);
                write_matrix_rows(out, p.variance);
            } else if constexpr (std::is_same_v<T, LogisticModel>) {
                out << "logistic " << p.weights.rows() << ' ' << p.weights.cols() << '\n';
                write_matrix_rows(out, p.weights);
                out << "bias";
                write_reals(out, p.bias.data(), static_cast<std::size_t>(p.bias.size()));
                out << '\n';
            } else if constexpr (std::is_same_v<T, MlpModel>) {
                const auto sizes = p.layer_sizes();
                out << "mlp " << sizes.size();
                for (int s : sizes) out << ' ' << s;
                out << '\n';
                for (std::size_t l = 0; l < p.weights.size(); ++l) {
                    out << "layer " << p.weights[l].rows() << ' ' << p.weights[l].cols() << '\n';
                    write_matrix_rows(out, p.weights[l]);
                    out << "bias";
                    write_reals(out, p.biases[l].data(), static_cast<std::size_t>(p.biases[l].size()));
                    out << '\n';
                }
            } else {
                out << "constant\n";
            }
        },
        m.params);
    out << "end\n";
    if (!out) throw Error(ErrorKind::Io, "model", "write failed");
}

TrainedModel load_model(std::istream& in) {
    Reader r(in);
    {
        const auto head = r.next();
        if (head.size() != 2 || head[0] != kMagic || head[1].size() < 2 || head[1][0] != 'v')
            throw r.corrupt("missing airshadow-model header");
        const long version = r.integer(head[1].substr(1), 0, kMaxCount);
        if (version != kVersion)
            throw Error(ErrorKind::VersionMismatch, head[1], "this build reads v" + std::to_string(kVersion));
    }
    TrainedModel m;
    ModelFamily family{};
    try {
        family = parse_model_family(r.expect("family", 2)[1]);
        const auto spec = r.expect("spec", 1);
        std::string line;
        for (std::size_t i = 1; i < spec.size(); ++i) line += spec[i] + " ";
        m.spec = ModelSpec::parse_line(line);
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::CorruptModel) throw;
        throw r.corrupt(e.what());
    }

    const auto cls = r.expect("classes", 2);
    const long nc = r.integer(cls[1], 1, kMaxCount);
    if (cls.size() != static_cast<std::size_t>(nc) + 2) throw r.corrupt("class count");
    for (long i = 0; i < nc; ++i) m.classes.push_back(static_cast<int>(r.integer(cls[static_cast<std::size_t>(i) + 2], -(1L << 30), 1L << 30)));
    if (!std::is_sorted(m.classes.begin(), m.classes.end())) throw r.corrupt("classes not sorted");
    const auto c = static_cast<std::size_t>(nc);

    m.feature_count = static_cast<std::size_t>(r.integer(r.expect("features", 2)[1], 0, kMaxCount));
    const auto f = m.feature_count;
    const auto names = r.expect("names", 2);
    const long nn = r.integer(names[1], 0, kMaxCount);
    if (names.size() != static_cast<std::size_t>(nn) + 2 || (nn != 0 && static_cast<std::size_t>(nn) != f))
        throw r.corrupt("feature names");
    m.feature_names.assign(names.begin() + 2, names.end());

    if (r.integer(r.expect("normalizer", 2)[1], 0, 1) == 1) {
        Normalizer n;
        n.mean = r.reals(r.expect("mean", 1), 1, f);
        n.scale = r.reals(r.expect("scale", 1), 1, f);
        m.normalizer = std::move(n);
    }

    switch (family) {
    case ModelFamily::DecisionTree: m.params = read_tree(r, c, f); break;
    case ModelFamily::RandomForest: {
        const long trees = r.integer(r.expect("forest", 2)[1], 1, kMaxCount);
        ForestModel forest;
        for (long t = 0; t < trees; ++t) forest.trees.push_back(read_tree(r, c, f));
        m.params = std::move(forest);
        break;
    }
    case ModelFamily::Knn: {
        const auto head = r.expect("knn", 4);
        KnnModel k;
        const long rows = r.integer(head[2], 1, kMaxCount);
        k.k = static_cast<int>(r.integer(head[1], 1, rows));
        if (static_cast<std::size_t>(r.integer(head[3], 0, kMaxCount)) != f) throw r.corrupt("knn width");
        k.points = Matrix(static_cast<std::size_t>(rows), f);
        for (long i = 0; i < rows; ++i) {
            const auto tok = r.next();
            if (tok.empty()) throw r.corrupt("knn row");
            k.labels.push_back(static_cast<int>(r.integer(tok[0], 0, nc - 1)));
            const auto v = r.reals(tok, 1, f);
            std::copy(v.begin(), v.end(), k.points.row(static_cast<std::size_t>(i)).begin());
        }
        m.params = std::move(k);
        break;
    }
    case ModelFamily::GaussianNb: {
        const auto head = r.expect("gnb", 3);
        if (r.integer(head[1], 0, kMaxCount) != nc || static_cast<std::size_t>(r.integer(head[2], 0, kMaxCount)) != f)
            throw r.corrupt("gnb shape");
        GaussianNbModel g;
        const auto prior = r.reals(r.expect("prior", 1), 1, c);
        g.log_prior = Eigen::Map<const Eigen::VectorXd>(prior.data(), nc);
        g.mean = r.matrix(nc, static_cast<long>(f));
        g.variance = r.matrix(nc, static_cast<long>(f));
        m.params = std::move(g);
        break;
    }
    case ModelFamily::LogisticRegression: {
        const auto head = r.expect("logistic", 3);
        if (r.integer(head[1], 0, kMaxCount) != nc || static_cast<std::size_t>(r.integer(head[2], 0, kMaxCount)) != f)
            throw r.corrupt("logistic shape");
        LogisticModel lm;
        lm.weights = r.matrix(nc, static_cast<long>(f));
        const auto bias = r.reals(r.expect("bias", 1), 1, c);
        lm.bias = Eigen::Map<const Eigen::VectorXd>(bias.data(), nc);
        m.params = std::move(lm);
        break;
    }
    case ModelFamily::Mlp: {
        const auto head = r.expect("mlp", 2);
        const long count = r.integer(head[1], 2, 1000);
        if (head.size() != static_cast<std::size_t>(count) + 2) throw r.corrupt("mlp sizes");
        std::vector<long> sizes;
        for (long i = 0; i < count; ++i) sizes.push_back(r.integer(head[static_cast<std::size_t>(i) + 2], 1, kMaxCount));
        if (static_cast<std::size_t>(sizes.front()) != f || sizes.back() != nc) throw r.corrupt("mlp shape");
        MlpModel net;
        for (long l = 0; l + 1 < count; ++l) {
            const auto layer = r.expect("layer", 3);
            const auto out_n = sizes[static_cast<std::size_t>(l) + 1];
            const auto in_n = sizes[static_cast<std::size_t>(l)];
            if (r.integer(layer[1], 0, kMaxCount) != out_n || r.integer(layer[2], 0, kMaxCount) != in_n)
                throw r.corrupt("mlp layer shape");
            net.weights.push_back(r.matrix(out_n, in_n));
            const auto b = r.reals(r.expect("bias", 1), 1, static_cast<std::size_t>(out_n));
            net.biases.push_back(Eigen::Map<const Eigen::VectorXd>(b.data(), out_n));
        }
        m.params = std::move(net);
        break;
    }
    case ModelFamily::Constant:
        r.expect("constant", 1);
        m.params = ConstantModel{};
        break;
    }
    r.expect("end", 1);
    return m;
}

} // namespace airshadow
