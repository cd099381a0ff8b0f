#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "origami/crease.hpp"
#include "origami/landmarks.hpp"

namespace origami {

enum class DescriptorKind { dtnnp, origami, combined };
std::string_view descriptor_kind_name(DescriptorKind k);

// Slot capacity of the origami descriptor.
struct DescriptorLayout {
    std::size_t max_nodes = 512;
    std::size_t max_edges = 768;

    std::size_t length() const { return 2 * max_nodes + 2 * max_edges; }
};

struct FeatureVector {
    DescriptorKind kind = DescriptorKind::dtnnp;
    std::string id;  // e.g. "dtnnp", "origami(n_max=512,e_max=768)"
    std::vector<double> values;
};

enum class DisplacementMode {
    euclidean,  // sqrt(dx^2 + dy^2 [+ dz^2])
    strict,     // sqrt(dx^2 - dy^2 [+ dz^2]), minus sign kept as written
};

// Per-landmark displacement between nose-normalized neutral and peak frames,
// ascending landmark id, nose excluded. Throws InputError on mismatched ids;
// in strict mode throws GeometryError when a radicand is negative.
FeatureVector dtnnp(const NormalizedFrame& neutral, const NormalizedFrame& peak,
                    DisplacementMode mode = DisplacementMode::euclidean);

// (x, y) for nodes sorted by id, then (id1, id2) / max_nodes for edges sorted
// lexicographically, zero padded to layout.length(). Throws ConfigError when
// the pattern does not fit.
FeatureVector origami_descriptor(const CreasePattern& pattern, const DescriptorLayout& layout = {});

// Concatenation in argument order. Throws ConfigError on an empty list.
FeatureVector combine(const std::vector<FeatureVector>& parts);

struct PcaModel {
    Eigen::RowVectorXd mean;
    Eigen::MatrixXd components;          // dims x features, rows are unit loadings
    Eigen::VectorXd explained_variance;  // per component (n - 1 denominator)
    Eigen::VectorXd explained_ratio;     // share of total variance

    Eigen::MatrixXd project(const Eigen::MatrixXd& rows) const;
    Eigen::MatrixXd reconstruct(const Eigen::MatrixXd& projected) const;
};

// Principal components of the rows of `data`. The sign of every component
// makes its largest-magnitude loading positive. Throws ConfigError unless
// 1 <= dims <= min(rows, cols).
PcaModel fit_pca(const Eigen::MatrixXd& data, std::size_t dims);

struct PcaResult {
    PcaModel model;
    Eigen::MatrixXd projected;
};

PcaResult reduce_pca(const Eigen::MatrixXd& data, std::size_t dims);

// Feature matrix as written to and read from CSV.
//
//   # n_max=<N>,e_max=<E>,descriptor=<id>
//   sequence,label,f0,f1,...
//   <sequence>,<label>,<v0>,<v1>,...
//
// The id runs to the end of the line (it may contain commas).
// n_max / e_max are 0 when no origami part is present. Values use
// round-trip precision so a re-read matrix is bit-identical.
struct FeatureTable {
    std::string descriptor_id;
    std::size_t n_max = 0;
    std::size_t e_max = 0;
    std::vector<std::string> sequences;
    std::vector<int> labels;
    std::vector<std::vector<double>> rows;

    std::size_t width() const { return rows.empty() ? 0 : rows.front().size(); }
};

std::string write_feature_csv(const FeatureTable& table);
// Throws InputError with line context on malformed input.
FeatureTable read_feature_csv(std::string_view text);

}  // namespace origami
