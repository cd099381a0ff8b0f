#include "origami/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <mutex>
#include <optional>
#include <ostream>
#include <random>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "origami/crease.hpp"
#include "origami/error.hpp"
#include "origami/pipeline.hpp"
#include "origami/synthetic.hpp"

namespace origami {

namespace fs = std::filesystem;

namespace {

struct GlobalOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::size_t jobs = 1;
};

PipelineConfig effective_config(const GlobalOptions& g) {
    PipelineConfig cfg = g.config_path.empty() ? PipelineConfig{} : load_config(g.config_path);
    if (g.seed) cfg.seed = *g.seed;
    return cfg;
}

std::size_t worker_count(std::size_t jobs, std::size_t tasks) {
    if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
    return std::max<std::size_t>(1, std::min(jobs, tasks));
}

// Runs body(i) for i in [0, n) on up to `jobs` threads.
template <class Body>
void parallel_for(std::size_t n, std::size_t jobs, Body body) {
    const std::size_t workers = worker_count(jobs, n);
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) body(i);
        });
    for (auto& t : pool) t.join();
}

// Per-sample generator: independent of sample order and of --jobs.
std::mt19937_64 sample_rng(std::uint64_t seed, int cls, int index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(cls), static_cast<std::uint32_t>(index)};
    return std::mt19937_64(seq);
}

double unit_interval(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

struct SynthArgs {
    std::string out_dir;
    int classes = 0, samples = 0, frames = 0, dimension = 0;
    double intensity_min = 0.0;
};

void cmd_synth(const GlobalOptions& g, SynthArgs a, const CLI::App& sub, std::ostream& out) {
    const PipelineConfig cfg = effective_config(g);
    PipelineConfig check = cfg;
    if (!sub.count("--classes")) a.classes = cfg.synth.classes;
    if (!sub.count("--samples")) a.samples = cfg.synth.samples;
    if (!sub.count("--frames")) a.frames = cfg.synth.frames;
    if (!sub.count("--dimension")) a.dimension = cfg.synth.dimension;
    if (!sub.count("--intensity-min")) a.intensity_min = cfg.synth.intensity_min;
    check.synth = {a.classes, a.samples, a.intensity_min, a.frames, a.dimension};
    check.validate();

    const fs::path dir(a.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error("cannot create directory '" + dir.string() + "': " + ec.message());

    std::string manifest = "path,label\n";
    for (int c = 0; c < a.classes; ++c) {
        for (int i = 0; i < a.samples; ++i) {
            auto rng = sample_rng(cfg.seed, c, i);
            SyntheticParams p;
            p.class_id = c;
            p.class_count = a.classes;
            p.frame_count = a.frames;
            p.dimension = a.dimension;
            p.seed = rng();
            p.intensity = a.intensity_min + (1.0 - a.intensity_min) * unit_interval(rng);
            Sequence seq = generate_synthetic_face(p);
            char name[64];
            std::snprintf(name, sizeof name, "seq_c%d_%03d", c, i);
            seq.subject = name;
            const std::string file = std::string(name) + ".json";
            write_text_file(dir / file, serialize_landmark_sequence(seq));
            manifest += file + "," + std::to_string(c) + "\n";
        }
    }
    write_text_file(dir / "manifest.csv", manifest);
    out << "wrote " << a.classes * a.samples << " sequences and " << (dir / "manifest.csv").string()
        << "\n";
}

struct CreaseArgs {
    std::string input, out, svg, colors = "default", events;
};

void cmd_crease(const GlobalOptions& g, const CreaseArgs& a, std::ostream& out) {
    const PipelineConfig cfg = effective_config(g);
    const SvgStyle style = svg_style_preset(a.colors);
    const TreeTopology topology = resolve_topology(cfg);
    const Sequence seq = parse_landmark_sequence(read_text_file(a.input));
    const FaceAnalysis fa = analyze_sequence(seq, topology, cfg);

    const std::string json = serialize_pattern(fa.shrink.pattern);
    if (a.out.empty()) out << json;
    else write_text_file(a.out, json);
    if (!a.svg.empty()) write_text_file(a.svg, to_svg(fa.shrink.pattern, style));
    if (!a.events.empty()) write_text_file(a.events, events_to_jsonl(fa.shrink.events));
}

struct ExtractArgs {
    std::string manifest, descriptors = "both", out;
};

void cmd_extract(const GlobalOptions& g, const ExtractArgs& a, std::ostream& out) {
    const PipelineConfig cfg = effective_config(g);
    const auto set = parse_descriptor_set(a.descriptors);
    if (!set) throw ConfigError("unknown descriptor set '" + a.descriptors + "' (dtnnp, origami, both)");
    const TreeTopology topology = resolve_topology(cfg);
    const std::vector<ManifestRow> rows = read_manifest(a.manifest);

    std::vector<std::optional<FeatureVector>> results(rows.size());
    std::vector<std::string> failures(rows.size());
    std::vector<bool> input_failure(rows.size(), false);
    parallel_for(rows.size(), g.jobs, [&](std::size_t i) {
        try {
            const Sequence seq = parse_landmark_sequence(read_text_file(rows[i].path));
            results[i] = extract_features(seq, *set, topology, cfg);
        } catch (const Error& e) {
            failures[i] = e.what();
            input_failure[i] = e.is_input_error();
        } catch (const std::exception& e) {
            failures[i] = e.what();
        }
    });

    std::string report;
    std::size_t failed = 0;
    bool all_input = true;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (results[i]) continue;
        ++failed;
        all_input = all_input && input_failure[i];
        report += "\n  row " + std::to_string(i + 1) + " (" + rows[i].path.string() + "): " + failures[i];
    }
    if (failed) {
        const std::string msg = std::to_string(failed) + " of " + std::to_string(rows.size()) +
                                " sequences failed; no output written:" + report;
        if (all_input) throw InputError(msg);
        throw Error(msg);
    }

    FeatureTable table;
    if (*set != DescriptorSet::dtnnp) {
        table.n_max = cfg.layout.max_nodes;
        table.e_max = cfg.layout.max_edges;
    }
    if (!rows.empty()) table.descriptor_id = results.front()->id;
    else if (*set == DescriptorSet::dtnnp) table.descriptor_id = "dtnnp";
    else table.descriptor_id = std::string(descriptor_kind_name(
                                   *set == DescriptorSet::origami ? DescriptorKind::origami
                                                                  : DescriptorKind::combined));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        table.sequences.push_back(rows[i].path.stem().string());
        table.labels.push_back(rows[i].label);
        table.rows.push_back(std::move(results[i]->values));
    }
    write_text_file(a.out, write_feature_csv(table));
    out << "wrote " << rows.size() << " rows x " << table.width() << " features to " << a.out << "\n";
}

struct EvalArgs {
    std::vector<std::string> inputs;
    std::size_t k = 0;
    std::size_t origami_pca = 0;
    double c = 0.0;
    std::string kernel, json;
};

void cmd_eval(const GlobalOptions& g, EvalArgs a, const CLI::App& sub, std::ostream& out) {
    PipelineConfig cfg = effective_config(g);
    if (sub.count("--k")) cfg.k = a.k;
    if (sub.count("--c")) cfg.c = a.c;
    if (sub.count("--origami-pca")) cfg.origami_pca = a.origami_pca;
    if (sub.count("--kernel")) {
        const auto k = parse_kernel(a.kernel);
        if (!k) throw ConfigError("unknown kernel '" + a.kernel + "' (linear, quadratic)");
        cfg.kernel = *k;
    }
    cfg.validate();

    SvmParams params;
    params.c = cfg.c;
    params.kernel = cfg.kernel;
    params.seed = cfg.seed;

    std::vector<EvalReport> reports;
    for (const auto& path : a.inputs) {
        FeatureTable t;
        try {
            t = read_feature_csv(read_text_file(path));
        } catch (const InputError& e) {
            throw InputError(path + ": " + e.what());
        }
        std::optional<BlockReduction> reduction;
        const std::size_t block = 2 * t.n_max + 2 * t.e_max;
        if (cfg.origami_pca > 0 && block > 0) {
            if (block > t.width())
                throw InputError(path + ": header layout (n_max=" + std::to_string(t.n_max) +
                                 ", e_max=" + std::to_string(t.e_max) + ") exceeds the " +
                                 std::to_string(t.width()) + " feature columns");
            reduction = BlockReduction{t.width() - block, t.width(), cfg.origami_pca};
        }
        Dataset data;
        data.features = std::move(t.rows);
        data.labels = std::move(t.labels);
        EvalReport r = kfold_evaluate(data, cfg.k, params, g.jobs, reduction);
        r.feature_set = t.descriptor_id.empty() ? fs::path(path).stem().string() : t.descriptor_id;
        reports.push_back(std::move(r));
    }
    out << reports_to_table(reports);
    if (!a.json.empty()) write_text_file(a.json, reports_to_json(reports));
}

std::string error_kind(const std::exception& e) {
    if (dynamic_cast<const InputError*>(&e)) return "input";
    if (dynamic_cast<const ConfigError*>(&e)) return "config";
    if (dynamic_cast<const GeometryError*>(&e)) return "geometry";
    return "internal";
}

int report_error(std::ostream& err, const std::string& kind, const std::string& message, int code) {
    nlohmann::json j;
    j["error"] = {{"kind", kind}, {"message", message}, {"exit_code", code}};
    err << j.dump() << "\n";
    return code;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Origami crease-pattern descriptors for facial landmarks", "origami"};
    app.require_subcommand(1);
    app.fallthrough();

    GlobalOptions g;
    std::uint64_t seed = 0;
    app.add_option("--config", g.config_path, "JSON pipeline configuration");
    auto* seed_opt = app.add_option("--seed", seed, "Seed for synthesis and fold assignment");
    app.add_option("--jobs", g.jobs, "Worker threads (0: one per core)")->capture_default_str();

    SynthArgs synth;
    auto* s = app.add_subcommand("synth", "Write synthetic landmark sequences and a manifest");
    s->add_option("--out", synth.out_dir, "Output directory")->required();
    s->add_option("--classes", synth.classes, "Number of expression classes (1-6)");
    s->add_option("--samples", synth.samples, "Sequences per class");
    s->add_option("--intensity-min", synth.intensity_min, "Lower bound of the expression intensity");
    s->add_option("--frames", synth.frames, "Frames per sequence");
    s->add_option("--dimension", synth.dimension, "2 or 3");

    CreaseArgs crease;
    auto* c = app.add_subcommand("crease", "Compute the crease pattern of one sequence");
    c->add_option("input", crease.input, "Landmark sequence JSON")->required();
    c->add_option("--out,-o", crease.out, "Crease pattern JSON (stdout when omitted)");
    c->add_option("--svg", crease.svg, "Also write an SVG rendering");
    c->add_option("--colors", crease.colors, "SVG colour map: default, mono, kind-contrast")
        ->capture_default_str();
    c->add_option("--events", crease.events, "Also write the event log as JSONL");

    ExtractArgs extract;
    auto* x = app.add_subcommand("extract", "Extract a feature CSV from a manifest");
    x->add_option("manifest", extract.manifest, "Manifest CSV (path,label)")->required();
    x->add_option("--descriptors,-d", extract.descriptors, "dtnnp, origami or both")
        ->capture_default_str();
    x->add_option("--out,-o", extract.out, "Feature CSV")->required();

    EvalArgs eval;
    auto* e = app.add_subcommand("eval", "Cross-validate a quadratic SVM on feature CSVs");
    e->add_option("inputs", eval.inputs, "Feature CSVs, one report column each")->required();
    e->add_option("--k", eval.k, "Number of folds");
    e->add_option("--c", eval.c, "Soft-margin penalty");
    e->add_option("--kernel", eval.kernel, "quadratic or linear");
    e->add_option("--origami-pca", eval.origami_pca,
                  "Principal components kept from the origami block (0: raw block)");
    e->add_option("--json", eval.json, "Write the JSON report here");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(std::move(reversed));
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& pe) {
        return report_error(err, "usage", pe.what(), 1);
    }
    if (seed_opt->count()) g.seed = seed;

    try {
        if (s->parsed()) cmd_synth(g, synth, *s, out);
        else if (c->parsed()) cmd_crease(g, crease, out);
        else if (x->parsed()) cmd_extract(g, extract, out);
        else if (e->parsed()) cmd_eval(g, eval, *e, out);
        return 0;
    } catch (const Error& ex) {
        return report_error(err, error_kind(ex), ex.what(), ex.is_input_error() ? 2 : 1);
    } catch (const std::exception& ex) {
        return report_error(err, "internal", ex.what(), 1);
    }
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run_cli(args, out, err);
}

}  // namespace origami
