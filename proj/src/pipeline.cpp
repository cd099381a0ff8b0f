#include "origami/pipeline.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "origami/error.hpp"

namespace origami {

namespace fs = std::filesystem;
using nlohmann::json;

std::optional<DescriptorSet> parse_descriptor_set(std::string_view name) {
    if (name == "dtnnp") return DescriptorSet::dtnnp;
    if (name == "origami") return DescriptorSet::origami;
    if (name == "both") return DescriptorSet::both;
    return std::nullopt;
}

void PipelineConfig::validate() const {
    auto bad = [](const std::string& what) { throw ConfigError("config: " + what); };
    if (!(margin >= 0.0)) bad("polygon.margin must be >= 0");
    if (shrink.th < 0.0) bad("shrink.th must be >= 0");
    if (shrink.step < 0.0) bad("shrink.step must be >= 0");
    if (!(shrink.refine_tol > 0.0)) bad("shrink.refine_tol must be > 0");
    if (layout.max_nodes == 0 || layout.max_edges == 0) bad("descriptor.n_max and e_max must be > 0");
    if (k < 2) bad("classifier.k must be >= 2");
    if (!(c > 0.0)) bad("classifier.c must be > 0");
    if (synth.classes < 1 || synth.classes > 6) bad("synth.classes must be in [1, 6]");
    if (synth.samples < 0) bad("synth.samples must be >= 0");
    if (!(synth.intensity_min >= 0.0 && synth.intensity_min <= 1.0))
        bad("synth.intensity_min must be in [0, 1]");
    if (synth.frames < 2) bad("synth.frames must be >= 2");
    if (synth.dimension != 2 && synth.dimension != 3) bad("synth.dimension must be 2 or 3");
}

namespace {

class Reader {
public:
    Reader(const json& obj, std::string where) : obj_(obj), where_(std::move(where)) {
        if (!obj_.is_object()) throw ConfigError("config" + where_ + ": expected an object");
        for (const auto& [key, value] : obj_.items()) keys_.push_back(key);
    }

    void allow(std::initializer_list<const char*> names) const {
        for (const auto& key : keys_) {
            bool ok = false;
            for (const char* n : names) ok = ok || key == n;
            if (!ok) throw ConfigError("config" + where_ + ": unknown key '" + key + "'");
        }
    }

    const json* find(const char* key) const {
        const auto it = obj_.find(key);
        return it == obj_.end() ? nullptr : &*it;
    }

    std::string path(const char* key) const { return where_ + "/" + key; }

    void number(const char* key, double& out) const {
        if (const json* v = find(key)) {
            if (!v->is_number()) throw ConfigError("config" + path(key) + ": expected a number");
            out = v->get<double>();
        }
    }

    template <class T>
    void integer(const char* key, T& out) const {
        if (const json* v = find(key)) {
            if (!v->is_number_integer() || (std::is_unsigned_v<T> && v->get<long long>() < 0))
                throw ConfigError("config" + path(key) + ": expected a non-negative integer");
            out = v->get<T>();
        }
    }

    void boolean(const char* key, bool& out) const {
        if (const json* v = find(key)) {
            if (!v->is_boolean()) throw ConfigError("config" + path(key) + ": expected a boolean");
            out = v->get<bool>();
        }
    }

    std::optional<std::string> string(const char* key) const {
        const json* v = find(key);
        if (!v) return std::nullopt;
        if (!v->is_string()) throw ConfigError("config" + path(key) + ": expected a string");
        return v->get<std::string>();
    }

private:
    const json& obj_;
    std::string where_;
    std::vector<std::string> keys_;
};

}  // namespace

PipelineConfig parse_config(std::string_view text, const fs::path& base_dir) {
    json doc;
    try {
        doc = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    PipelineConfig cfg;
    const Reader root(doc, "");
    root.allow({"topology", "align", "polygon", "shrink", "descriptor", "classifier", "synth"});
    if (auto topo = root.string("topology")) {
        fs::path p(*topo);
        cfg.topology_path = p.is_absolute() ? p : base_dir / p;
    }
    root.boolean("align", cfg.align);
    if (const json* v = root.find("polygon")) {
        const Reader r(*v, "/polygon");
        r.allow({"margin"});
        r.number("margin", cfg.margin);
    }
    if (const json* v = root.find("shrink")) {
        const Reader r(*v, "/shrink");
        r.allow({"th", "step", "refine_tol", "max_events", "metric"});
        r.number("th", cfg.shrink.th);
        r.number("step", cfg.shrink.step);
        r.number("refine_tol", cfg.shrink.refine_tol);
        r.integer("max_events", cfg.shrink.max_events);
        if (auto m = r.string("metric")) {
            const auto metric = parse_tree_metric(*m);
            if (!metric) throw ConfigError("config/shrink/metric: unknown metric '" + *m + "'");
            cfg.shrink.metric = *metric;
        }
    }
    if (const json* v = root.find("descriptor")) {
        const Reader r(*v, "/descriptor");
        r.allow({"n_max", "e_max", "dtnnp_mode"});
        r.integer("n_max", cfg.layout.max_nodes);
        r.integer("e_max", cfg.layout.max_edges);
        if (auto m = r.string("dtnnp_mode")) {
            if (*m == "euclidean") cfg.dtnnp_mode = DisplacementMode::euclidean;
            else if (*m == "strict") cfg.dtnnp_mode = DisplacementMode::strict;
            else throw ConfigError("config/descriptor/dtnnp_mode: unknown mode '" + *m + "'");
        }
    }
    if (const json* v = root.find("classifier")) {
        const Reader r(*v, "/classifier");
        r.allow({"k", "c", "kernel", "seed", "origami_pca"});
        r.integer("origami_pca", cfg.origami_pca);
        r.integer("k", cfg.k);
        r.number("c", cfg.c);
        r.integer("seed", cfg.seed);
        if (auto k = r.string("kernel")) {
            const auto kernel = parse_kernel(*k);
            if (!kernel) throw ConfigError("config/classifier/kernel: unknown kernel '" + *k + "'");
            cfg.kernel = *kernel;
        }
    }
    if (const json* v = root.find("synth")) {
        const Reader r(*v, "/synth");
        r.allow({"classes", "samples", "intensity_min", "frames", "dimension"});
        r.integer("classes", cfg.synth.classes);
        r.integer("samples", cfg.synth.samples);
        r.number("intensity_min", cfg.synth.intensity_min);
        r.integer("frames", cfg.synth.frames);
        r.integer("dimension", cfg.synth.dimension);
    }
    cfg.validate();
    return cfg;
}

PipelineConfig load_config(const fs::path& path) {
    std::string text;
    try {
        text = read_text_file(path);
    } catch (const InputError& e) {
        throw ConfigError(e.what());
    }
    return parse_config(text, path.parent_path());
}

TreeTopology resolve_topology(const PipelineConfig& cfg) {
    if (!cfg.topology_path) return default_topology();
    return parse_topology(read_text_file(*cfg.topology_path));
}

FaceAnalysis analyze_sequence(const Sequence& seq, const TreeTopology& topology,
                              const PipelineConfig& cfg) {
    const std::size_t peak = select_peak_frame(seq);
    const LandmarkFrame& neutral = seq.frames[seq.neutral_index];
    const LandmarkFrame aligned =
        cfg.align ? align_affine(seq.frames[peak], neutral).aligned : seq.frames[peak];
    NormalizedFrame nn = normalize_to_nose(neutral);
    NormalizedFrame np = normalize_to_nose(aligned);
    ShadowTree tree = build_shadow_tree(np, topology);
    LangPolygon polygon = build_lang_polygon(tree, cfg.margin);
    ShrinkResult sr = shrink(polygon, tree, cfg.shrink);
    sr.pattern.provenance["subject"] = seq.subject;
    sr.pattern.provenance["peak_frame"] = std::to_string(seq.frames[peak].index);
    sr.pattern.provenance["topology"] = topology.name;
    return FaceAnalysis{peak, std::move(nn), std::move(np), std::move(tree), std::move(polygon),
                        std::move(sr)};
}

FeatureVector extract_features(const Sequence& seq, DescriptorSet set, const TreeTopology& topology,
                               const PipelineConfig& cfg) {
    const FaceAnalysis fa = analyze_sequence(seq, topology, cfg);
    FeatureVector d = dtnnp(fa.neutral, fa.peak, cfg.dtnnp_mode);
    if (set == DescriptorSet::dtnnp) return d;
    FeatureVector o = origami_descriptor(fa.shrink.pattern, cfg.layout);
    if (set == DescriptorSet::origami) return o;
    return combine({std::move(d), std::move(o)});
}

std::string read_text_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot read '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw InputError("error while reading '" + path.string() + "'");
    return ss.str();
}

void write_text_file(const fs::path& path, std::string_view text) {
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
        if (ec) throw Error("cannot create directory '" + path.parent_path().string() + "': " + ec.message());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open '" + path.string() + "' for writing");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    out.close();
    if (!out) throw Error("error while writing '" + path.string() + "'");
}

std::vector<ManifestRow> read_manifest(const fs::path& manifest) {
    const std::string text = read_text_file(manifest);
    const fs::path base = manifest.parent_path();
    std::vector<ManifestRow> rows;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    bool header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (!header) {
            if (line != "path,label")
                throw InputError(manifest.string() + ":1: expected header 'path,label'");
            header = true;
            continue;
        }
        const std::size_t comma = line.rfind(',');
        if (comma == std::string::npos)
            throw InputError(manifest.string() + ":" + std::to_string(line_no) + ": expected 'path,label'");
        ManifestRow row;
        const fs::path p(line.substr(0, comma));
        row.path = p.is_absolute() ? p : base / p;
        try {
            std::size_t used = 0;
            const std::string lab = line.substr(comma + 1);
            row.label = std::stoi(lab, &used);
            if (used != lab.size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw InputError(manifest.string() + ":" + std::to_string(line_no) + ": label is not an integer");
        }
        rows.push_back(std::move(row));
    }
    if (!header) throw InputError(manifest.string() + ": missing header 'path,label'");
    return rows;
}

}  // namespace origami
