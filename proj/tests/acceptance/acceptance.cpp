// Acceptance run: one PASS/FAIL line per criterion, exit status 0 only when
// every criterion passes.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include <unistd.h>

#include <json.hpp>

#include "oracles/reference.hpp"
#include "oracles/shrink_oracle.hpp"
#include "origami/classify.hpp"
#include "origami/cli.hpp"
#include "origami/crease.hpp"
#include "origami/descriptors.hpp"
#include "origami/lang_polygon.hpp"
#include "origami/molecule.hpp"
#include "origami/synthetic.hpp"
#include "unit/helpers.hpp"

using namespace origami;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok && pass) detail = what;
        pass = pass && ok;
    }
};

char buf[256];

template <typename... Args>
std::string fmt(const char* f, Args... args) {
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

std::vector<NodeId> set_union_of(const std::vector<NodeId>& a, const std::vector<NodeId>& b) {
    std::vector<NodeId> out;
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

std::vector<NodeId> set_intersection_of(const std::vector<NodeId>& a, const std::vector<NodeId>& b) {
    std::vector<NodeId> out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

Outcome confusion_metrics() {
    const Confusion c{{38, 2, 3, 0, 0, 2, 0}, {1, 15, 0, 0, 1, 1, 0}, {5, 0, 54, 0, 0, 0, 0},
                      {0, 0, 0, 19, 4, 0, 2}, {0, 2, 0, 1, 66, 0, 0},  {3, 0, 1, 1, 1, 22, 0},
                      {0, 2, 0, 0, 1, 0, 80}};
    const Metrics m = metrics(c);
    Outcome o;
    o.require(std::abs(m.accuracy - 294.0 / 327.0) < 1e-12, "accuracy differs from 294/327");
    o.require(std::abs(m.accuracy - 0.899) <= 0.001, "accuracy not within 0.001 of 0.899");
    o.require(std::abs(m.per_class[6].recall - 80.0 / 83.0) <= 1e-6, "surprise recall differs from 80/83");
    if (o.pass) o.detail = fmt("accuracy %.6f, surprise recall %.6f", m.accuracy, m.per_class[6].recall);
    return o;
}

Outcome lang_condition() {
    std::mt19937_64 rng(1001);
    Outcome o;
    std::size_t pairs = 0;
    for (int trial = 0; trial < 200 && o.pass; ++trial) {
        const int leaves = 4 + trial % 37;
        const ShadowTree tree = oracle::random_tree(rng, leaves);
        const LangPolygon p = build_lang_polygon(tree);
        std::vector<int> order;
        for (const auto& v : p.vertices) order.push_back(v.leaf);
        o.require(verify_lang_condition(p, tree, 1e-9).empty(), fmt("tree %d: library reports violations", trial));
        o.require(oracle::lang_violations(order, p.positions(), oracle::floyd_warshall(tree), 1e-9).empty(),
                  fmt("tree %d: exhaustive check finds violations", trial));
        o.require(is_convex(p.positions()), fmt("tree %d: polygon not convex", trial));
        pairs += static_cast<std::size_t>(leaves * (leaves - 1) / 2);
    }
    if (o.pass) o.detail = fmt("200 trees, %zu leaf pairs, 0 violations", pairs);
    return o;
}

Outcome engine_oracle() {
    std::mt19937_64 rng(1002);
    Outcome o;
    std::size_t events = 0;
    double worst = 0.0;
    for (int trial = 0; trial < 60 && o.pass; ++trial) {
        const ShadowTree tree = oracle::random_tree(rng, 3 + static_cast<int>(rng() % 4));
        const LangPolygon poly = build_lang_polygon(tree);
        for (TreeMetric metric : {TreeMetric::lang_reduced, TreeMetric::fixed}) {
            ShrinkConfig cfg;
            cfg.metric = metric;
            const ShrinkResult r = shrink(poly, tree, cfg);
            oracle::OracleConfig oc{r.config.th, r.config.step, r.config.refine_tol, 1000, metric};
            const auto expected = oracle::brute_force_shrink(poly, tree, oc);
            std::map<int, std::vector<std::pair<EventKind, double>>> mine, theirs;
            for (const auto& e : r.events) mine[e.polygon].emplace_back(e.kind, e.depth);
            for (const auto& e : expected) theirs[e.polygon].emplace_back(e.kind, e.depth);
            bool same = mine.size() == theirs.size();
            for (const auto& [id, list] : theirs) {
                if (!same) break;
                auto it = mine.find(id);
                same = it != mine.end() && it->second.size() == list.size();
                for (std::size_t e = 0; same && e < list.size(); ++e) {
                    const double gap = std::abs(it->second[e].second - list[e].second);
                    worst = std::max(worst, gap);
                    same = it->second[e].first == list[e].first && gap <= 10 * r.config.refine_tol;
                }
            }
            o.require(same, fmt("tree %d (%s): event lists differ", trial, std::string(tree_metric_name(metric)).c_str()));
            events += expected.size();
        }
    }
    for (int p = 3; p <= 16 && o.pass; ++p) {
        const ShadowTree star = oracle::star_tree(p, 1.0);
        const ShrinkResult r = shrink(testing::regular_star_polygon(star, 1.0), star);
        std::size_t splits = 0, terminals = 0;
        for (const auto& e : r.events) {
            splits += e.kind == EventKind::split;
            terminals += e.kind == EventKind::terminal;
        }
        const CreaseNode* centre = r.pattern.find_node(r.events.back().crease_node);
        o.require(splits == 0 && terminals == 1, fmt("star %d: %zu splits, %zu terminals", p, splits, terminals));
        o.require(centre && centre->kind == NodeKind::terminal && std::hypot(centre->x, centre->y) <= 1e-6,
                  fmt("star %d: terminal node off centre", p));
    }
    if (o.pass) o.detail = fmt("120 runs, %zu events, max depth gap %.2e; stars 3-16 clean", events, worst);
    return o;
}

Outcome structural_invariants() {
    std::mt19937_64 rng(1003);
    Outcome o;
    std::size_t splits_checked = 0, contractions = 0;
    for (int trial = 0; trial < 200 && o.pass; ++trial) {
        const int leaves = 4 + static_cast<int>(rng() % 37);
        const ShadowTree tree = oracle::random_tree(rng, leaves);
        const LangPolygon poly = build_lang_polygon(tree);
        const ShrinkResult r = shrink(poly, tree);
        const std::string tag = fmt("tree %d", trial);

        o.require(r.events.size() < r.config.max_events && r.events.back().active_polygons == 0,
                  tag + ": no termination before max_events");
        std::size_t vertices = poly.vertices.size(), polygons = 1;
        std::set<NodeId> done;
        for (std::size_t e = 0; e < r.events.size(); ++e) {
            const auto& ev = r.events[e];
            if (e > 0) o.require(ev.depth >= r.events[e - 1].depth, tag + ": depth decreased");
            if (ev.kind == EventKind::contraction) --vertices, ++contractions;
            if (ev.kind == EventKind::split) vertices += 2, ++polygons;
            if (ev.kind == EventKind::terminal) {
                vertices -= ev.vertices.size();
                --polygons;
                done.insert(ev.leaves.begin(), ev.leaves.end());
            }
            o.require(ev.active_vertices == vertices && ev.active_polygons == polygons, tag + ": vertex bookkeeping");
        }
        o.require(done.size() == static_cast<std::size_t>(leaves), tag + ": leaves lost");
        o.require(is_connected(r.pattern), tag + ": crease graph disconnected");
        o.require(find_crossings(r.pattern, 1e-7).empty(), tag + ": crease edges cross");

        const ShrinkResult again = shrink(poly, tree);
        o.require(events_to_jsonl(again.events) == events_to_jsonl(r.events) &&
                      serialize_pattern(again.pattern) == serialize_pattern(r.pattern),
                  tag + ": repeated run differs");

        // Replay with the public operations to inspect every split.
        const ShrinkConfig cfg = r.config;
        ShrinkRecorder rec;
        std::vector<ActivePolygon> stack{make_active_polygon(poly, rec)};
        int next_id = 1;
        while (!stack.empty() && o.pass) {
            ActivePolygon cur = stack.back();
            stack.pop_back();
            const PendingEvent ev = next_event(cur, tree, cfg);
            if (ev.kind == EventKind::terminal) continue;
            cur = offset_step(cur, ev.depth - cur.depth, cfg.th);
            if (ev.kind == EventKind::contraction) {
                ActivePolygon next = apply_contraction(cur, ev.i, cfg.th, rec);
                o.require(next.size() + 1 == cur.size() && next.leaf_set() == cur.leaf_set(),
                          tag + ": contraction changed more than one vertex");
                stack.push_back(std::move(next));
                continue;
            }
            const SplitCandidate cand = pair_distance(cur, tree, ev.split.i, ev.split.k, cfg.metric);
            const SplitResult parts = apply_split(cur, cand, tree, cfg.th, cfg.metric, rec, next_id, next_id + 1);
            next_id += 2;
            std::vector<NodeId> ends;
            for (std::size_t v : {cand.i, cand.k})
                for (const auto& l : cur.vertices[v].leaves) ends.push_back(l.leaf);
            std::sort(ends.begin(), ends.end());
            const auto f = parts.first.leaf_set(), g = parts.second.leaf_set();
            o.require(set_union_of(f, g) == cur.leaf_set() && set_intersection_of(f, g) == ends,
                      tag + ": split leaf partition");
            ++splits_checked;
            stack.push_back(parts.first);
            stack.push_back(parts.second);
        }
    }

    // Earliest edge collapse on the canonical face.
    const ShadowTree tree = testing::canonical_tree();
    const LangPolygon poly = build_lang_polygon(tree);
    const ShrinkConfig cfg = ShrinkConfig{}.resolved(poly);
    ShrinkRecorder rec;
    const ActivePolygon root = make_active_polygon(poly, rec);
    double t = std::numeric_limits<double>::infinity();
    std::size_t edge = 0;
    for (std::size_t i = 0; i < root.size(); ++i) {
        const double rate = dot(root.vertices[(i + 1) % root.size()].velocity - root.vertices[i].velocity, root.edge_dirs[i]);
        if (rate < 0.0 && edge_length(root, i) / -rate < t) t = edge_length(root, i) / -rate, edge = i;
    }
    const ActivePolygon collapsed = apply_contraction(offset_step(root, t, cfg.th), edge, cfg.th, rec);
    o.require(root.size() == 37 && collapsed.size() == 36, "canonical face: collapse is not 37 -> 36");

    if (o.pass)
        o.detail = fmt("200 trees, %zu contractions, %zu split partitions; canonical 37 -> 36", contractions,
                       splits_checked);
    return o;
}

Outcome descriptor_suite() {
    Outcome o;
    SyntheticParams sp;
    sp.seed = 77;
    sp.class_id = 1;
    Sequence seq = generate_synthetic_face(sp);
    // Coordinates on a 1/1024 grid so integer shifts are exact.
    for (auto& f : seq.frames)
        for (auto& p : f.points) p.position = {std::round(p.position.x * 1024) / 1024, std::round(p.position.y * 1024) / 1024, 0};
    const LandmarkFrame& neutral = seq.frames.front();
    const LandmarkFrame& peak = seq.frames.back();

    const FeatureVector zero = dtnnp(normalize_to_nose(neutral), normalize_to_nose(neutral));
    o.require(std::all_of(zero.values.begin(), zero.values.end(), [](double v) { return v == 0.0; }),
              "identical frames give a non-zero vector");

    LandmarkFrame a, b;
    a.points = {{1, Region::nose, {0, 0, 0}}, {2, Region::mouth, {0, 0, 0}}};
    b.points = {{1, Region::nose, {0, 0, 0}}, {2, Region::mouth, {3, 4, 0}}};
    o.require(dtnnp(normalize_to_nose(a), normalize_to_nose(b)).values == std::vector<double>{5.0},
              "3-4-5 displacement is not exactly 5");

    auto shifted = [](LandmarkFrame f, double dx, double dy) {
        for (auto& p : f.points) p.position += Vec3{dx, dy, 0};
        return f;
    };
    const FeatureVector base = dtnnp(normalize_to_nose(neutral), normalize_to_nose(peak));
    const FeatureVector moved = dtnnp(normalize_to_nose(shifted(neutral, 17, -5)), normalize_to_nose(shifted(peak, -3, 11)));
    o.require(base.values == moved.values, "translation changes the descriptor");

    const ShadowTree tree = build_shadow_tree(normalize_to_nose(peak), default_topology());
    const CreasePattern pat = shrink(build_lang_polygon(tree), tree).pattern;
    const CreasePattern decoded = decode_complex(encode_complex(pat));
    bool same = decoded.nodes.size() == pat.nodes.size() && decoded.edges.size() == pat.edges.size();
    for (std::size_t i = 0; same && i < pat.nodes.size(); ++i)
        same = decoded.nodes[i].id == pat.nodes[i].id && decoded.nodes[i].x == pat.nodes[i].x &&
               decoded.nodes[i].y == pat.nodes[i].y;
    for (std::size_t i = 0; same && i < pat.edges.size(); ++i)
        same = decoded.edges[i].a == pat.edges[i].a && decoded.edges[i].b == pat.edges[i].b;
    o.require(same, "complex encoding round trip differs");

    const nlohmann::json doc = nlohmann::json::parse(serialize_pattern(pat));
    const FeatureVector v = origami_descriptor(pat);
    const DescriptorLayout layout;
    bool slots = v.values.size() == layout.length();
    std::size_t slot = 0;
    for (const auto& n : doc.at("nodes")) {
        slots = slots && v.values[slot] == n.at("x").get<double>() && v.values[slot + 1] == n.at("y").get<double>();
        slot += 2;
    }
    for (; slot < 2 * layout.max_nodes; ++slot) slots = slots && v.values[slot] == 0.0;
    for (const auto& e : doc.at("edges")) {
        slots = slots && v.values[slot] == e.at("a").get<double>() / double(layout.max_nodes) &&
                v.values[slot + 1] == e.at("b").get<double>() / double(layout.max_nodes);
        slot += 2;
    }
    for (; slot < layout.length(); ++slot) slots = slots && v.values[slot] == 0.0;
    o.require(slots, "descriptor slots disagree with the serialized pattern");
    o.require(origami_descriptor(deserialize_pattern(serialize_pattern(pat))).values == v.values,
              "descriptor changes after a serialization round trip");

    if (o.pass) o.detail = fmt("%zu nodes, %zu edges in slot check", pat.nodes.size(), pat.edges.size());
    return o;
}

Outcome end_to_end() {
    Outcome o;
    const fs::path root = fs::temp_directory_path() / ("origami_acceptance_" + std::to_string(::getpid()));
    fs::remove_all(root);
    int wins = 0, seeds = 0;
    std::string per_seed;
    for (int seed = 101; seed <= 105; ++seed) {
        const fs::path dir = root / std::to_string(seed);
        const std::string s = std::to_string(seed);
        std::ostringstream out, err;
        auto run = [&](std::vector<std::string> args) {
            const int code = run_cli(args, out, err);
            o.require(code == 0, "seed " + s + ": '" + args[2] + "' failed: " + err.str());
            return code == 0;
        };
        if (!run({"--seed", s, "synth", "--out", (dir / "data").string(), "--classes", "4", "--samples", "50"}) ||
            !run({"--seed", s, "extract", (dir / "data/manifest.csv").string(), "-d", "dtnnp", "-o",
                  (dir / "dtnnp.csv").string()}) ||
            !run({"--seed", s, "extract", (dir / "data/manifest.csv").string(), "-d", "both", "-o",
                  (dir / "both.csv").string()}) ||
            !run({"--seed", s, "eval", (dir / "dtnnp.csv").string(), (dir / "both.csv").string(), "--k", "10",
                  "--json", (dir / "report.json").string()}))
            break;
        std::ifstream in(dir / "report.json");
        const nlohmann::json report = nlohmann::json::parse(in);
        const double d = report.at("reports").at(0).at("mean_macro_f1").get<double>();
        const double c = report.at("reports").at(1).at("mean_macro_f1").get<double>();
        ++seeds;
        wins += c >= d;
        per_seed += fmt("%s%d: %.4f vs %.4f", per_seed.empty() ? "" : "; ", seed, c, d);
    }
    fs::remove_all(root);
    o.require(seeds == 5 && wins * 2 > seeds, "combined below dtnnp on most seeds");
    o.detail = fmt("combined >= dtnnp on %d/%d seeds (", wins, seeds) + per_seed + ")";
    return o;
}

Outcome svm_correctness() {
    Outcome o;
    Dataset x;
    x.features = {{1, 1}, {-1, -1}, {1, -1}, {-1, 1}};
    x.labels = {0, 0, 1, 1};
    SvmParams p;
    p.c = 10.0;
    o.require(svm_predict(svm_train(x, p), x.features) == x.labels, "quadratic kernel misclassifies XOR");

    std::mt19937_64 rng(1007);
    std::normal_distribution<double> g(0.0, 1.0);
    Dataset d;
    for (int i = 0; i < 90; ++i) {
        const int c = i % 3;
        d.features.push_back({g(rng) + 2.0 * (c == 0), g(rng) + 2.0 * (c == 1), g(rng), g(rng) + c});
        d.labels.push_back(c);
    }
    const SvmModel m = svm_train(d);
    std::uniform_real_distribution<double> u(-4.0, 4.0);
    double worst = 0.0;
    for (int t = 0; t < 100; ++t) {
        const std::vector<double> z{u(rng), u(rng), u(rng), u(rng)};
        const auto got = m.decision_values(z);
        const auto want = oracle::kernel_sum(m, z);
        std::size_t best = 0;
        for (std::size_t c = 0; c < want.size(); ++c) {
            worst = std::max(worst, std::abs(got[c] - want[c]));
            if (want[c] > want[best]) best = c;
        }
        o.require(m.predict(z) == m.classes[best], "prediction differs from the kernel expansion");
    }
    o.require(worst <= 1e-6, fmt("decision values off by %.3e", worst));
    if (o.pass) o.detail = fmt("XOR separated; 100 points, max decision gap %.2e", worst);
    return o;
}

}  // namespace

int main() {
    struct Criterion {
        const char* name;
        double budget_s;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria{
        {"confusion-matrix metrics", 1.0, confusion_metrics},
        {"lang condition on random trees", 10.0, lang_condition},
        {"engine matches brute-force oracle", 60.0, engine_oracle},
        {"structural invariants", 600.0, structural_invariants},
        {"descriptor suite", 60.0, descriptor_suite},
        {"end-to-end combined vs dtnnp", 300.0, end_to_end},
        {"svm correctness", 60.0, svm_correctness},
    };
    bool all = true;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (secs > c.budget_s) {
            o.pass = false;
            o.detail += fmt(" [over time budget %.0f s]", c.budget_s);
        }
        all = all && o.pass;
        std::printf("%s  %-36s %7.2f s  %s\n", o.pass ? "PASS" : "FAIL", c.name, secs, o.detail.c_str());
        std::fflush(stdout);
    }
    return all ? 0 : 1;
}
