#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "origami/classify.hpp"
#include "origami/descriptors.hpp"
#include "origami/lang_polygon.hpp"
#include "origami/molecule.hpp"
#include "origami/shadow_tree.hpp"

namespace origami {

enum class DescriptorSet { dtnnp, origami, both };
std::optional<DescriptorSet> parse_descriptor_set(std::string_view name);

struct SynthSettings {
    int classes = 4;
    int samples = 50;            // per class
    double intensity_min = 0.2;  // per-sample intensity drawn from [intensity_min, 1]
    int frames = 8;
    int dimension = 2;
};

// Everything the CLI can configure. JSON form (every key optional):
//
//   {"topology": "path/to/topology.json",
//    "align": true,
//    "polygon": {"margin": 0.05},
//    "shrink": {"th": 0, "step": 0, "refine_tol": 1e-9, "max_events": 0,
//               "metric": "lang-reduced" | "fixed"},
//    "descriptor": {"n_max": 512, "e_max": 768, "dtnnp_mode": "euclidean" | "strict"},
//    "classifier": {"k": 10, "c": 1.0, "kernel": "quadratic" | "linear", "seed": 0,
//                   "origami_pca": 20},
//    "synth": {"classes": 4, "samples": 50, "intensity_min": 0.2, "frames": 8, "dimension": 2}}
//
// Zero shrink values select the engine defaults. Relative paths resolve
// against the config file's directory.
struct PipelineConfig {
    std::optional<std::filesystem::path> topology_path;
    bool align = true;  // affine-align the peak frame onto the neutral frame
    double margin = 0.05;
    ShrinkConfig shrink;
    DescriptorLayout layout;
    DisplacementMode dtnnp_mode = DisplacementMode::euclidean;
    std::size_t k = 10;
    double c = 1.0;
    Kernel kernel = Kernel::quadratic;
    std::uint64_t seed = 0;
    // Principal components kept from the origami block of a feature CSV
    // before classification (fitted per training fold); 0 keeps the raw block.
    std::size_t origami_pca = 20;
    SynthSettings synth;

    // Throws ConfigError naming the first out-of-range field.
    void validate() const;
};

// Throws ConfigError on unknown keys, wrong types or out-of-range values.
PipelineConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = {});
PipelineConfig load_config(const std::filesystem::path& path);

// The configured topology, or the built-in face topology.
TreeTopology resolve_topology(const PipelineConfig& cfg);

// Peak selection, alignment, nose normalization, tree, polygon and shrink for
// one sequence.
struct FaceAnalysis {
    std::size_t peak_index = 0;
    NormalizedFrame neutral;
    NormalizedFrame peak;
    ShadowTree tree;
    LangPolygon polygon;
    ShrinkResult shrink;
};

FaceAnalysis analyze_sequence(const Sequence& seq, const TreeTopology& topology,
                              const PipelineConfig& cfg);

// Feature vector of one sequence for the requested set.
FeatureVector extract_features(const Sequence& seq, DescriptorSet set, const TreeTopology& topology,
                               const PipelineConfig& cfg);

std::string read_text_file(const std::filesystem::path& path);         // InputError when unreadable
void write_text_file(const std::filesystem::path& path, std::string_view text);  // Error on failure

struct ManifestRow {
    std::filesystem::path path;  // resolved against the manifest's directory
    int label = 0;
};

// CSV with header "path,label".
std::vector<ManifestRow> read_manifest(const std::filesystem::path& manifest);

}  // namespace origami
