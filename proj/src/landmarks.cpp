#include "origami/landmarks.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include "json.hpp"
#include <set>

#include "origami/error.hpp"

namespace origami {

using nlohmann::json;

namespace {

constexpr std::array<std::string_view, 6> kRegionNames{
    "eyebrow_left", "eyebrow_right", "eye_left", "eye_right", "nose", "mouth"};

std::string frame_tag(std::size_t position, const LandmarkFrame& f) {
    return "frame " + std::to_string(position) + " (index " + std::to_string(f.index) + ")";
}

bool finite(Vec3 p) { return std::isfinite(p.x) && std::isfinite(p.y) && std::isfinite(p.z); }

}  // namespace

std::string_view region_name(Region r) { return kRegionNames[static_cast<std::size_t>(r)]; }

std::optional<Region> parse_region(std::string_view name) {
    for (std::size_t i = 0; i < kRegionNames.size(); ++i)
        if (kRegionNames[i] == name) return static_cast<Region>(i);
    return std::nullopt;
}

Region mirror_region(Region r) {
    switch (r) {
        case Region::eyebrow_left: return Region::eyebrow_right;
        case Region::eyebrow_right: return Region::eyebrow_left;
        case Region::eye_left: return Region::eye_right;
        case Region::eye_right: return Region::eye_left;
        default: return r;
    }
}

const Landmark& LandmarkFrame::nose() const {
    for (const auto& p : points)
        if (p.region == Region::nose) return p;
    throw InputError("missing nose landmark in frame " + std::to_string(index));
}

const Landmark* LandmarkFrame::find(int id) const {
    auto it = std::lower_bound(points.begin(), points.end(), id,
                               [](const Landmark& l, int v) { return l.id < v; });
    if (it != points.end() && it->id == id) return &*it;
    // Fall back to a linear scan for frames that are not sorted yet.
    for (const auto& p : points)
        if (p.id == id) return &p;
    return nullptr;
}

std::vector<int> LandmarkFrame::ids() const {
    std::vector<int> out;
    out.reserve(points.size());
    for (const auto& p : points) out.push_back(p.id);
    return out;
}

void validate_frame(LandmarkFrame& frame) {
    const std::string where = "frame " + std::to_string(frame.index);
    if (frame.dimension != 2 && frame.dimension != 3)
        throw InputError(where + ": dimension must be 2 or 3");
    std::sort(frame.points.begin(), frame.points.end(),
              [](const Landmark& a, const Landmark& b) { return a.id < b.id; });
    int noses = 0;
    for (std::size_t i = 0; i < frame.points.size(); ++i) {
        const auto& p = frame.points[i];
        if (i > 0 && frame.points[i - 1].id == p.id)
            throw InputError(where + ": duplicate landmark id " + std::to_string(p.id));
        if (!finite(p.position))
            throw InputError(where + ", landmark " + std::to_string(p.id) +
                             ": non-finite coordinate");
        if (frame.dimension == 2 && p.position.z != 0.0)
            throw InputError(where + ", landmark " + std::to_string(p.id) +
                             ": z coordinate in a 2D frame");
        if (p.region == Region::nose) ++noses;
    }
    if (noses == 0) throw InputError(where + ": missing nose landmark");
    if (noses > 1) throw InputError(where + ": more than one nose landmark");
}

void validate_sequence(Sequence& seq) {
    if (seq.frames.empty()) throw InputError("sequence has no frames");
    for (auto& f : seq.frames) validate_frame(f);
    const auto& ref = seq.frames.front();
    for (std::size_t k = 1; k < seq.frames.size(); ++k) {
        const auto& f = seq.frames[k];
        if (f.dimension != ref.dimension)
            throw InputError(frame_tag(k, f) + ": dimensionality differs from frame 0");
        for (const auto& p : f.points) {
            const Landmark* r = ref.find(p.id);
            if (r == nullptr)
                throw InputError(frame_tag(k, f) + ", landmark " + std::to_string(p.id) +
                                 ": id not present in frame 0");
            if (r->region != p.region)
                throw InputError(frame_tag(k, f) + ", landmark " + std::to_string(p.id) +
                                 ": region differs from frame 0");
        }
        for (const auto& p : ref.points)
            if (f.find(p.id) == nullptr)
                throw InputError(frame_tag(k, f) + ", landmark " + std::to_string(p.id) +
                                 ": id missing");
    }
    if (seq.neutral_index >= seq.frames.size())
        throw InputError("neutral_index " + std::to_string(seq.neutral_index) +
                         " out of range for " + std::to_string(seq.frames.size()) + " frames");
}

Sequence parse_landmark_sequence(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        throw InputError(std::string("malformed landmark JSON: ") + e.what());
    }
    auto require = [](const json& obj, const char* key, const std::string& where) -> const json& {
        if (!obj.is_object() || !obj.contains(key))
            throw InputError(where + ": missing field '" + key + "'");
        return obj.at(key);
    };

    Sequence seq;
    try {
        seq.subject = require(doc, "subject", "sequence").get<std::string>();
        seq.label = require(doc, "label", "sequence").get<int>();
        if (doc.contains("neutral_index")) {
            const auto n = doc.at("neutral_index").get<long long>();
            if (n < 0) throw InputError("neutral_index must be non-negative");
            seq.neutral_index = static_cast<std::size_t>(n);
        }
        const json& frames = require(doc, "frames", "sequence");
        if (!frames.is_array()) throw InputError("sequence: 'frames' must be an array");
        for (std::size_t k = 0; k < frames.size(); ++k) {
            const json& jf = frames[k];
            const std::string where = "frame " + std::to_string(k);
            LandmarkFrame f;
            const auto idx = require(jf, "index", where).get<long long>();
            if (idx < 0) throw InputError(where + ": index must be non-negative");
            f.index = static_cast<std::size_t>(idx);
            const json& pts = require(jf, "points", where);
            if (!pts.is_array() || pts.empty())
                throw InputError(where + ": 'points' must be a non-empty array");
            std::optional<int> dim;
            for (const json& jp : pts) {
                Landmark l;
                l.id = require(jp, "id", where).get<int>();
                const std::string lw = where + ", landmark " + std::to_string(l.id);
                const auto rname = require(jp, "region", lw).get<std::string>();
                const auto region = parse_region(rname);
                if (!region) throw InputError(lw + ": unknown region '" + rname + "'");
                l.region = *region;
                const json& pos = require(jp, "pos", lw);
                if (!pos.is_array() || (pos.size() != 2 && pos.size() != 3))
                    throw InputError(lw + ": 'pos' must have 2 or 3 coordinates");
                for (const json& c : pos)
                    if (!c.is_number()) throw InputError(lw + ": non-finite coordinate");
                const int d = static_cast<int>(pos.size());
                if (dim && *dim != d) throw InputError(lw + ": mixed 2D/3D coordinates");
                dim = d;
                l.position = {pos[0].get<double>(), pos[1].get<double>(),
                              d == 3 ? pos[2].get<double>() : 0.0};
                f.points.push_back(l);
            }
            f.dimension = *dim;
            seq.frames.push_back(std::move(f));
        }
    } catch (const json::exception& e) {
        throw InputError(std::string("landmark JSON schema error: ") + e.what());
    }
    validate_sequence(seq);
    return seq;
}

std::string serialize_landmark_sequence(const Sequence& seq) {
    json frames = json::array();
    for (const auto& f : seq.frames) {
        json pts = json::array();
        for (const auto& p : f.points) {
            json pos = json::array({p.position.x, p.position.y});
            if (f.dimension == 3) pos.push_back(p.position.z);
            pts.push_back({{"id", p.id}, {"region", region_name(p.region)}, {"pos", pos}});
        }
        frames.push_back({{"index", f.index}, {"points", std::move(pts)}});
    }
    json doc{{"subject", seq.subject},
             {"label", seq.label},
             {"neutral_index", seq.neutral_index},
             {"frames", std::move(frames)}};
    return doc.dump(1) + "\n";
}

namespace {

// Smallest-to-largest singular value ratio of the centered point cloud.
double conditioning(const Eigen::MatrixXd& pts) {
    const Eigen::MatrixXd centered = pts.rowwise() - pts.colwise().mean();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(centered);
    const auto& s = svd.singularValues();
    if (s(0) == 0.0) return 0.0;
    return s(s.size() - 1) / s(0);
}

}  // namespace

AffineFit align_affine(const LandmarkFrame& frame, const LandmarkFrame& templ) {
    if (frame.dimension != templ.dimension)
        throw InputError("align_affine: frame and template dimensionality differ");
    if (frame.points.size() != templ.points.size())
        throw InputError("align_affine: frame and template id sets differ");
    const int dim = frame.dimension;
    const auto n = static_cast<Eigen::Index>(frame.points.size());
    if (n < dim + 1) throw GeometryError("align_affine: too few points for an affine fit");

    Eigen::MatrixXd src(n, dim), dst(n, dim);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Landmark& p = frame.points[static_cast<std::size_t>(i)];
        const Landmark* q = templ.find(p.id);
        if (q == nullptr)
            throw InputError("align_affine: template lacks landmark " + std::to_string(p.id));
        const std::array<double, 3> a{p.position.x, p.position.y, p.position.z};
        const std::array<double, 3> b{q->position.x, q->position.y, q->position.z};
        for (int c = 0; c < dim; ++c) {
            src(i, c) = a[static_cast<std::size_t>(c)];
            dst(i, c) = b[static_cast<std::size_t>(c)];
        }
    }
    constexpr double kDegenerate = 1e-10;
    if (conditioning(dst) < kDegenerate)
        throw GeometryError(dim == 2 ? "align_affine: singular fit (collinear template)"
                                     : "align_affine: singular fit (coplanar template)");
    if (conditioning(src) < kDegenerate)
        throw GeometryError("align_affine: singular fit (degenerate frame)");

    Eigen::MatrixXd design(n, dim + 1);
    design.leftCols(dim) = src;
    design.col(dim).setOnes();
    const Eigen::MatrixXd coef = design.colPivHouseholderQr().solve(dst);  // (dim+1) x dim
    const Eigen::MatrixXd mapped = design * coef;

    AffineFit fit;
    fit.aligned = frame;
    double sq = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        Vec3& out = fit.aligned.points[static_cast<std::size_t>(i)].position;
        out.x = mapped(i, 0);
        out.y = mapped(i, 1);
        if (dim == 3) out.z = mapped(i, 2);
        sq += (mapped.row(i) - dst.row(i)).squaredNorm();
    }
    fit.residual = std::sqrt(sq / static_cast<double>(n));
    fit.transform.reserve(static_cast<std::size_t>(dim * (dim + 1)));
    for (int r = 0; r < dim; ++r)
        for (int c = 0; c <= dim; ++c) fit.transform.push_back(coef(c, r));
    return fit;
}

NormalizedFrame normalize_to_nose(const LandmarkFrame& frame) {
    LandmarkFrame out = frame;
    const Vec3 origin = frame.nose().position;
    for (auto& p : out.points) p.position = p.position - origin;
    // Exact zero regardless of rounding in the subtraction above.
    for (auto& p : out.points)
        if (p.region == Region::nose) p.position = {};
    return NormalizedFrame(std::move(out));
}

double total_displacement(const NormalizedFrame& a, const NormalizedFrame& b) {
    if (a.points().size() != b.points().size())
        throw InputError("frames have different landmark counts");
    double total = 0.0;
    for (std::size_t i = 0; i < a.points().size(); ++i) {
        if (a.points()[i].id != b.points()[i].id)
            throw InputError("frames have different landmark ids");
        total += distance(a.points()[i].position, b.points()[i].position);
    }
    return total;
}

std::size_t select_peak_frame(const Sequence& seq) {
    if (seq.frames.size() < 2)
        throw InputError("peak frame selection needs at least two frames");
    const NormalizedFrame neutral = normalize_to_nose(seq.frames.at(seq.neutral_index));
    std::size_t best = seq.neutral_index == 0 ? 1 : 0;
    double best_score = -1.0;
    for (std::size_t k = 0; k < seq.frames.size(); ++k) {
        if (k == seq.neutral_index) continue;
        const double score = total_displacement(normalize_to_nose(seq.frames[k]), neutral);
        if (score > best_score) {
            best_score = score;
            best = k;
        }
    }
    return best;
}

}  // namespace origami
