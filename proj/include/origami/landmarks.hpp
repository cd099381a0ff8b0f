#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "origami/vec.hpp"

namespace origami {

enum class Region { eyebrow_left, eyebrow_right, eye_left, eye_right, nose, mouth };

inline constexpr std::array<Region, 6> kAllRegions{Region::eyebrow_left, Region::eyebrow_right,
                                                   Region::eye_left,     Region::eye_right,
                                                   Region::nose,         Region::mouth};

std::string_view region_name(Region r);
std::optional<Region> parse_region(std::string_view name);
// eyebrow_left <-> eyebrow_right, eye_left <-> eye_right; nose and mouth are fixed.
Region mirror_region(Region r);

struct Landmark {
    int id = 0;
    Region region = Region::nose;
    Vec3 position;  // z is zero for 2D frames

    friend bool operator==(const Landmark&, const Landmark&) = default;
};

struct LandmarkFrame {
    std::size_t index = 0;
    int dimension = 2;                 // 2 or 3
    std::vector<Landmark> points;      // ascending id after validation

    // The unique landmark whose region is nose. Throws InputError if absent.
    const Landmark& nose() const;
    const Landmark* find(int id) const;
    std::vector<int> ids() const;

    friend bool operator==(const LandmarkFrame&, const LandmarkFrame&) = default;
};

// A frame whose nose landmark sits exactly at the origin. Only produced by
// normalize_to_nose.
class NormalizedFrame {
public:
    const LandmarkFrame& frame() const { return frame_; }
    const std::vector<Landmark>& points() const { return frame_.points; }
    int dimension() const { return frame_.dimension; }

    friend bool operator==(const NormalizedFrame&, const NormalizedFrame&) = default;

private:
    explicit NormalizedFrame(LandmarkFrame f) : frame_(std::move(f)) {}
    LandmarkFrame frame_;
    friend NormalizedFrame normalize_to_nose(const LandmarkFrame& frame);
};

struct Sequence {
    std::string subject;
    int label = 0;
    std::size_t neutral_index = 0;
    std::vector<LandmarkFrame> frames;

    friend bool operator==(const Sequence&, const Sequence&) = default;
};

// Checks the frame invariants: one nose point, unique ids, finite coordinates,
// dimension 2 or 3. Sorts points by id. Throws InputError naming the frame.
void validate_frame(LandmarkFrame& frame);

// Checks sequence-level invariants on top of validate_frame: non-empty, same
// id set / regions / dimensionality in every frame, neutral index in range.
void validate_sequence(Sequence& seq);

// JSON landmark sequence format:
//   {"subject": str, "label": int, "neutral_index": int,
//    "frames": [{"index": int, "points": [{"id": int, "region": str,
//                                          "pos": [x, y] | [x, y, z]}]}]}
Sequence parse_landmark_sequence(std::string_view text);
std::string serialize_landmark_sequence(const Sequence& seq);

struct AffineFit {
    LandmarkFrame aligned;
    // Row-major (dim) x (dim + 1) matrix [A | t] mapping frame -> template.
    std::vector<double> transform;
    // Root-mean-square distance between aligned points and template points.
    double residual = 0.0;
};

// Least-squares affine map of `frame` onto `templ` over homogeneous
// coordinates. Throws GeometryError when either point set is degenerate
// (collinear in 2D, coplanar in 3D).
AffineFit align_affine(const LandmarkFrame& frame, const LandmarkFrame& templ);

NormalizedFrame normalize_to_nose(const LandmarkFrame& frame);

// Sum over landmarks of the distance between nose-normalized positions.
double total_displacement(const NormalizedFrame& a, const NormalizedFrame& b);

// Index of the frame whose nose-normalized landmarks deviate most from the
// neutral frame. Ties go to the lowest index; the neutral frame itself is
// never returned.
std::size_t select_peak_frame(const Sequence& seq);

}  // namespace origami
