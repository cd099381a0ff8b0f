#include "origami/synthetic.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "origami/error.hpp"

namespace origami {
namespace {

struct LayoutPoint {
    int id;
    Region region;
    double x, y, z;
};

// Right half plus the nose tip; the left half is generated by mirroring.
// z is a rough depth profile (towards the camera is positive).
constexpr std::array<LayoutPoint, 19> kRightHalf{{
    {6, Region::nose, 0.0, 0.18, 0.30},
    {7, Region::eyebrow_right, 0.15, -0.56, 0.10},
    {8, Region::eyebrow_right, 0.32, -0.62, 0.09},
    {9, Region::eyebrow_right, 0.50, -0.64, 0.06},
    {10, Region::eyebrow_right, 0.68, -0.60, 0.02},
    {11, Region::eyebrow_right, 0.85, -0.50, -0.05},
    {12, Region::eye_right, 0.63, -0.30, -0.02},
    {13, Region::eye_right, 0.52, -0.37, 0.02},
    {14, Region::eye_right, 0.38, -0.37, 0.03},
    {15, Region::eye_right, 0.27, -0.30, 0.02},
    {16, Region::eye_right, 0.38, -0.23, 0.03},
    {17, Region::eye_right, 0.52, -0.23, 0.02},
    {18, Region::eye_right, 0.12, 0.00, 0.18},
    {19, Region::eye_right, 0.16, 0.14, 0.14},
    {20, Region::mouth, 0.38, 0.50, 0.02},
    {21, Region::mouth, 0.20, 0.42, 0.08},
    {22, Region::mouth, 0.20, 0.60, 0.07},
    {23, Region::mouth, 0.07, 0.40, 0.11},
    {24, Region::mouth, 0.07, 0.63, 0.10},
}};

constexpr std::array<std::pair<int, int>, 18> kMirror{{
    {1, 11}, {2, 10}, {3, 9}, {4, 8}, {5, 7},
    {12, 37}, {13, 36}, {14, 35}, {15, 34}, {16, 33}, {17, 32},
    {18, 31}, {19, 30},
    {20, 29}, {21, 28}, {22, 27}, {23, 26}, {24, 25},
}};

// Splitmix-style helpers over mt19937_64 so the stream does not depend on the
// standard library's distribution implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    double normal() {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    std::mt19937_64 engine_;
};

// Peak displacement of each landmark for an expression class, indexed by id.
using Displacement = std::array<Vec3, 38>;

void set_sym(Displacement& d, int right_id, double dx, double dy) {
    d[static_cast<std::size_t>(right_id)] = {dx, dy, 0.0};
    for (const auto& [l, r] : kMirror) {
        if (r == right_id) d[static_cast<std::size_t>(l)] = {-dx, dy, 0.0};
        if (l == right_id) d[static_cast<std::size_t>(r)] = {-dx, dy, 0.0};
    }
}

Displacement class_displacement(int class_id) {
    Displacement d{};
    switch (class_id) {
        case 0:  // brows raised, upper lids lifted
            set_sym(d, 7, 0.0, -0.14);
            set_sym(d, 8, 0.0, -0.15);
            set_sym(d, 9, 0.0, -0.14);
            set_sym(d, 10, 0.0, -0.12);
            set_sym(d, 11, 0.0, -0.09);
            set_sym(d, 13, 0.0, -0.04);
            set_sym(d, 14, 0.0, -0.04);
            break;
        case 1:  // smile: corners out and up, cheeks lift the lower lids
            set_sym(d, 20, 0.10, -0.10);
            set_sym(d, 21, 0.04, -0.05);
            set_sym(d, 22, 0.05, -0.03);
            set_sym(d, 16, 0.0, -0.03);
            set_sym(d, 17, 0.0, -0.03);
            break;
        case 2:  // jaw drop: lower lip down, corners in
            set_sym(d, 22, -0.02, 0.16);
            set_sym(d, 24, 0.0, 0.20);
            set_sym(d, 20, -0.05, 0.06);
            set_sym(d, 21, 0.0, -0.02);
            break;
        case 3:  // frown: inner brows down and together, corners down
            set_sym(d, 7, -0.05, 0.08);
            set_sym(d, 8, -0.03, 0.06);
            set_sym(d, 9, 0.0, 0.03);
            set_sym(d, 20, 0.0, 0.09);
            set_sym(d, 22, 0.0, 0.03);
            break;
        case 4:  // squint: lids close
            set_sym(d, 13, 0.0, 0.05);
            set_sym(d, 14, 0.0, 0.05);
            set_sym(d, 16, 0.0, -0.04);
            set_sym(d, 17, 0.0, -0.04);
            set_sym(d, 12, 0.02, 0.0);
            break;
        case 5:  // sneer: nasal flanks and upper lip rise
            set_sym(d, 18, 0.02, -0.06);
            set_sym(d, 19, 0.03, -0.07);
            set_sym(d, 21, 0.0, -0.07);
            set_sym(d, 23, 0.0, -0.08);
            break;
        default: break;
    }
    return d;
}

}  // namespace

LandmarkFrame canonical_face(int dimension) {
    if (dimension != 2 && dimension != 3)
        throw ConfigError("canonical_face: dimension must be 2 or 3");
    LandmarkFrame f;
    f.dimension = dimension;
    const double zs = dimension == 3 ? 1.0 : 0.0;
    for (const auto& p : kRightHalf) {
        f.points.push_back({p.id, p.region, {p.x, p.y, p.z * zs}});
        for (const auto& [a, b] : kMirror)
            if (a == p.id || b == p.id)
                f.points.push_back({a == p.id ? b : a, mirror_region(p.region), {-p.x, p.y, p.z * zs}});
    }
    validate_frame(f);
    return f;
}

std::vector<std::pair<int, int>> canonical_mirror_pairs() {
    std::vector<std::pair<int, int>> out(kMirror.begin(), kMirror.end());
    out.emplace_back(6, 6);
    return out;
}

Sequence generate_synthetic_face(const SyntheticParams& params) {
    if (params.class_count < 1 || params.class_count > kMaxSyntheticClasses)
        throw ConfigError("synthetic class count must be in [1, " +
                          std::to_string(kMaxSyntheticClasses) + "]");
    if (params.class_id < 0 || params.class_id >= params.class_count)
        throw InputError("unknown expression class " + std::to_string(params.class_id));
    if (!(params.intensity >= 0.0 && params.intensity <= 1.0))
        throw InputError("intensity must lie in [0, 1]");
    if (params.frame_count < 2) throw ConfigError("synthetic sequences need >= 2 frames");

    Rng rng(params.seed * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(params.class_id));
    const LandmarkFrame base = canonical_face(params.dimension);
    const Displacement expr = class_displacement(params.class_id);
    const bool is3d = params.dimension == 3;

    // Subject: global scale, head offset and per-landmark shape variation.
    const double scale = rng.uniform(0.92, 1.08);
    const Vec3 offset{rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5),
                      is3d ? rng.uniform(-0.2, 0.2) : 0.0};
    LandmarkFrame neutral = base;
    for (auto& p : neutral.points) {
        const Vec3 jitter{0.02 * rng.normal(), 0.02 * rng.normal(),
                          is3d ? 0.01 * rng.normal() : 0.0};
        p.position = (p.position + jitter) * scale + offset;
    }
    // Expression: class template, per-landmark gain, and a small random field.
    std::vector<Vec3> peak_delta(neutral.points.size());
    const double gain = rng.uniform(0.8, 1.2);
    for (std::size_t i = 0; i < neutral.points.size(); ++i) {
        const Vec3 e = expr[static_cast<std::size_t>(neutral.points[i].id)];
        const double local = 1.0 + 0.15 * rng.normal();
        const Vec3 wobble{0.012 * rng.normal(), 0.012 * rng.normal(), 0.0};
        peak_delta[i] = (e * (gain * local) + wobble) * (params.intensity * scale);
    }
    // The nose tip anchors the face; expressions never move it.
    for (std::size_t i = 0; i < neutral.points.size(); ++i)
        if (neutral.points[i].region == Region::nose) peak_delta[i] = {};

    Sequence seq;
    seq.subject = "synthetic-" + std::to_string(params.seed);
    seq.label = params.class_id;
    seq.neutral_index = 0;
    for (int k = 0; k < params.frame_count; ++k) {
        const double ramp = static_cast<double>(k) / static_cast<double>(params.frame_count - 1);
        LandmarkFrame f = neutral;
        f.index = static_cast<std::size_t>(k);
        if (params.intensity > 0.0)
            for (std::size_t i = 0; i < f.points.size(); ++i)
                f.points[i].position = f.points[i].position + peak_delta[i] * ramp;
        seq.frames.push_back(std::move(f));
    }
    return seq;
}

}  // namespace origami
