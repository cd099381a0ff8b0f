#pragma once

#include <cstdint>
#include <vector>

#include "origami/landmarks.hpp"

namespace origami {

// The canonical 37-landmark face layout used by the synthetic generator and the
// default shadow-tree topology. Ids 1..37 follow the perimeter order of the
// Lang polygon: left eyebrow, nose tip, right eyebrow, right eye and nasal
// flank, mouth (right to left), left nasal flank and left eye. Coordinates are
// image-style (y grows downwards), face width about 2.
LandmarkFrame canonical_face(int dimension = 2);

// Landmark id pairs swapped by the left/right mirror (x -> -x). Self-mirrored
// ids (nose tip) appear as (id, id).
std::vector<std::pair<int, int>> canonical_mirror_pairs();

inline constexpr int kMaxSyntheticClasses = 6;

struct SyntheticParams {
    int class_id = 0;
    double intensity = 1.0;  // in [0, 1]
    std::uint64_t seed = 0;
    int class_count = 4;     // 1..kMaxSyntheticClasses
    int frame_count = 8;     // >= 2; frame 0 is neutral, the last is the peak
    int dimension = 2;
};

// Deterministic neutral -> peak sequence on the canonical layout. Each class
// deforms its own set of regions; the seed drives subject shape variation, a
// head offset shared by every frame, and per-landmark variation of the
// expression. Intensity 0 yields identical frames.
Sequence generate_synthetic_face(const SyntheticParams& params);

}  // namespace origami
