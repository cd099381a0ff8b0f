#include "origami/descriptors.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>

#include "origami/error.hpp"

namespace origami {

std::string_view descriptor_kind_name(DescriptorKind k) {
    switch (k) {
        case DescriptorKind::dtnnp: return "dtnnp";
        case DescriptorKind::origami: return "origami";
        case DescriptorKind::combined: return "combined";
    }
    return "?";
}

FeatureVector dtnnp(const NormalizedFrame& neutral, const NormalizedFrame& peak,
                    DisplacementMode mode) {
    const auto& a = neutral.points();
    const auto& b = peak.points();
    if (a.size() != b.size()) throw InputError("dtnnp: frames have different landmark counts");
    FeatureVector out;
    out.kind = DescriptorKind::dtnnp;
    out.id = mode == DisplacementMode::strict ? "dtnnp-strict" : "dtnnp";
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].id != b[i].id)
            throw InputError("dtnnp: landmark id " + std::to_string(a[i].id) +
                             " has no counterpart in the peak frame");
        if (a[i].region == Region::nose) continue;
        const Vec3 d = b[i].position - a[i].position;
        if (mode == DisplacementMode::euclidean) {
            out.values.push_back(norm(d));
            continue;
        }
        const double r = d.x * d.x - d.y * d.y + d.z * d.z;
        if (r < 0.0)
            throw GeometryError("dtnnp strict mode: negative radicand at landmark " +
                                std::to_string(a[i].id));
        out.values.push_back(std::sqrt(r));
    }
    return out;
}

FeatureVector origami_descriptor(const CreasePattern& pattern, const DescriptorLayout& layout) {
    if (pattern.nodes.size() > layout.max_nodes || pattern.edges.size() > layout.max_edges)
        throw ConfigError("crease pattern with " + std::to_string(pattern.nodes.size()) +
                          " nodes and " + std::to_string(pattern.edges.size()) +
                          " edges exceeds the descriptor layout (n_max=" +
                          std::to_string(layout.max_nodes) +
                          ", e_max=" + std::to_string(layout.max_edges) + ")");
    CreasePattern p = pattern;
    p.canonicalize();
    FeatureVector out;
    out.kind = DescriptorKind::origami;
    out.id = "origami(n_max=" + std::to_string(layout.max_nodes) +
             ",e_max=" + std::to_string(layout.max_edges) + ")";
    out.values.assign(layout.length(), 0.0);
    std::size_t slot = 0;
    for (const auto& n : p.nodes) {
        out.values[slot++] = n.x;
        out.values[slot++] = n.y;
    }
    const double scale = static_cast<double>(layout.max_nodes);
    slot = 2 * layout.max_nodes;
    for (const auto& e : p.edges) {
        out.values[slot++] = static_cast<double>(e.a) / scale;
        out.values[slot++] = static_cast<double>(e.b) / scale;
    }
    return out;
}

FeatureVector combine(const std::vector<FeatureVector>& parts) {
    if (parts.empty()) throw ConfigError("combine needs at least one feature vector");
    FeatureVector out;
    out.kind = DescriptorKind::combined;
    out.id = "combined[";
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out.id += '+';
        out.id += parts[i].id;
        out.values.insert(out.values.end(), parts[i].values.begin(), parts[i].values.end());
    }
    out.id += ']';
    return out;
}

Eigen::MatrixXd PcaModel::project(const Eigen::MatrixXd& rows) const {
    if (rows.cols() != mean.size()) throw InputError("PCA projection: feature width mismatch");
    return (rows.rowwise() - mean) * components.transpose();
}

Eigen::MatrixXd PcaModel::reconstruct(const Eigen::MatrixXd& projected) const {
    return (projected * components).rowwise() + mean;
}

PcaModel fit_pca(const Eigen::MatrixXd& data, std::size_t dims) {
    const auto n = static_cast<std::size_t>(data.rows());
    const auto d = static_cast<std::size_t>(data.cols());
    if (dims < 1 || dims > std::min(n, d))
        throw ConfigError("PCA dims must lie in [1, " + std::to_string(std::min(n, d)) + "]");
    if (!data.allFinite()) throw InputError("PCA input contains non-finite values");

    PcaModel m;
    m.mean = data.colwise().mean();
    const Eigen::MatrixXd centered = data.rowwise() - m.mean;
    // Thin SVD of the centred data: right singular vectors are the loadings.
    Eigen::BDCSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinV);
    const Eigen::VectorXd sv = svd.singularValues();
    const double denom = n > 1 ? static_cast<double>(n - 1) : 1.0;
    const Eigen::VectorXd var = sv.array().square() / denom;
    const double total = var.sum();

    const auto k = static_cast<Eigen::Index>(dims);
    m.components = svd.matrixV().leftCols(k).transpose();
    for (Eigen::Index r = 0; r < k; ++r) {
        Eigen::Index at = 0;
        m.components.row(r).cwiseAbs().maxCoeff(&at);
        if (m.components(r, at) < 0.0) m.components.row(r) *= -1.0;
    }
    m.explained_variance = var.head(k);
    m.explained_ratio = total > 0.0 ? Eigen::VectorXd(var.head(k) / total)
                                    : Eigen::VectorXd::Zero(k);
    return m;
}

PcaResult reduce_pca(const Eigen::MatrixXd& data, std::size_t dims) {
    PcaResult r;
    r.model = fit_pca(data, dims);
    r.projected = r.model.project(data);
    return r;
}

namespace {

void append_number(std::string& out, double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    out.append(buf, res.ptr);
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        out.push_back(line.substr(start, comma == std::string_view::npos ? comma : comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

template <class T>
bool parse_number(std::string_view s, T& out) {
    const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

}  // namespace

std::string write_feature_csv(const FeatureTable& t) {
    if (t.sequences.size() != t.rows.size() || t.labels.size() != t.rows.size())
        throw InputError("feature table: row, label and sequence counts differ");
    const std::size_t w = t.width();
    if (t.descriptor_id.find('\n') != std::string::npos)
        throw InputError("feature table: descriptor id contains a newline");
    std::string out = "# n_max=" + std::to_string(t.n_max) + ",e_max=" + std::to_string(t.e_max) +
                      ",descriptor=" + t.descriptor_id + "\n";
    out += "sequence,label";
    for (std::size_t j = 0; j < w; ++j) out += ",f" + std::to_string(j);
    out += '\n';
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        if (t.rows[i].size() != w) throw InputError("feature table: ragged rows");
        if (t.sequences[i].find_first_of(",\n\"") != std::string::npos)
            throw InputError("feature table: sequence name '" + t.sequences[i] +
                             "' contains a comma, quote or newline");
        out += t.sequences[i];
        out += ',';
        out += std::to_string(t.labels[i]);
        for (double v : t.rows[i]) {
            out += ',';
            append_number(out, v);
        }
        out += '\n';
    }
    return out;
}

FeatureTable read_feature_csv(std::string_view text) {
    FeatureTable t;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    bool seen_header = false;
    std::size_t width = 0;
    auto fail = [&](const std::string& msg) -> InputError {
        return InputError("feature CSV line " + std::to_string(line_no) + ": " + msg);
    };
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;
        if (line.front() == '#') {
            line.remove_prefix(1);
            while (!line.empty() && line.front() == ' ') line.remove_prefix(1);
            const std::size_t id_at = line.find("descriptor=");
            if (id_at != std::string_view::npos) {
                t.descriptor_id = std::string(line.substr(id_at + 11));
                line = line.substr(0, id_at);
            }
            for (auto field : split_fields(line)) {
                const std::size_t eq = field.find('=');
                if (eq == std::string_view::npos) continue;
                const auto key = field.substr(0, eq), value = field.substr(eq + 1);
                if (key == "n_max" && !parse_number(value, t.n_max)) throw fail("bad n_max");
                else if (key == "e_max" && !parse_number(value, t.e_max)) throw fail("bad e_max");
            }
            continue;
        }
        const auto fields = split_fields(line);
        if (!seen_header) {
            if (fields.size() < 2 || fields[0] != "sequence" || fields[1] != "label")
                throw fail("expected header 'sequence,label,...'");
            width = fields.size() - 2;
            seen_header = true;
            continue;
        }
        if (fields.size() != width + 2)
            throw fail("expected " + std::to_string(width + 2) + " fields, found " +
                       std::to_string(fields.size()));
        int label = 0;
        if (!parse_number(fields[1], label)) throw fail("label is not an integer");
        std::vector<double> row(width);
        for (std::size_t j = 0; j < width; ++j)
            if (!parse_number(fields[j + 2], row[j]) || !std::isfinite(row[j]))
                throw fail("column f" + std::to_string(j) + " is not a finite number");
        t.sequences.emplace_back(fields[0]);
        t.labels.push_back(label);
        t.rows.push_back(std::move(row));
    }
    if (!seen_header) throw InputError("feature CSV: missing header row");
    return t;
}

}  // namespace origami
