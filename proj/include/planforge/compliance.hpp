#pragma once

#include <array>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <vector>

#include "planforge/graph.hpp"
#include "planforge/prompt.hpp"

namespace planforge {

// Residential design rules (a)-(g).
enum class Rule { counts, areas, existence, connectivity, circulation, compactness, design_norms };

inline constexpr std::array<Rule, 7> kAllRules = {
    Rule::counts,      Rule::areas,       Rule::existence,    Rule::connectivity,
    Rule::circulation, Rule::compactness, Rule::design_norms,
};

inline char rule_letter(Rule r) { return static_cast<char>('a' + static_cast<int>(r)); }

inline std::string rule_name(Rule r) {
    switch (r) {
        case Rule::counts: return "counts";
        case Rule::areas: return "areas";
        case Rule::existence: return "existence";
        case Rule::connectivity: return "connectivity";
        case Rule::circulation: return "circulation";
        case Rule::compactness: return "compactness";
        case Rule::design_norms: return "design_norms";
    }
    return {};
}

enum class RuleStatus { pass, fail, not_applicable };

inline std::string status_name(RuleStatus s) {
    switch (s) {
        case RuleStatus::pass: return "pass";
        case RuleStatus::fail: return "fail";
        case RuleStatus::not_applicable: return "not_applicable";
    }
    return {};
}

struct RuleResult {
    Rule rule = Rule::counts;
    RuleStatus status = RuleStatus::not_applicable;
    std::string details;
};

struct Violation {
    Rule rule = Rule::counts;
    std::string message;
    std::vector<std::string> refs;
};

struct ComplianceReport {
    std::array<RuleResult, 7> rules;
    std::vector<Violation> violations;

    const RuleResult& operator[](Rule r) const { return rules[static_cast<std::size_t>(r)]; }
    RuleStatus status(Rule r) const { return (*this)[r].status; }

    bool all_applicable_pass() const {
        for (const auto& r : rules)
            if (r.status == RuleStatus::fail) return false;
        return true;
    }
};

// "Rooms of class a sit next to at least one room of class b."
struct AdjacencyNorm {
    Label a = Label::living;
    Label b = Label::kitchen;
};

struct ComplianceOptions {
    std::optional<double> area_divisor;
    double area_rel_tolerance = 0.15;
    std::vector<AdjacencyNorm> norms{{Label::living, Label::kitchen}};
    // Interior-mask pixel count of the plan; needed for compactness.
    std::optional<long long> interior_pixels;
    // Thresholds for the report-only rules; unset means measure but do not judge.
    std::optional<double> min_compactness;
    std::optional<int> max_path_length;
};

namespace detail {

inline std::string fmt_ratio(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

// Hop distances from `source`; -1 for unreachable nodes. Keyed by node position.
inline std::vector<int> hop_distances(const KnowledgeGraph& kg, std::size_t source) {
    std::map<int, std::size_t> pos;
    for (std::size_t i = 0; i < kg.nodes.size(); ++i) pos[kg.nodes[i].id] = i;
    std::vector<std::vector<std::size_t>> adj(kg.nodes.size());
    for (const auto& [u, v] : kg.edges) {
        adj[pos.at(u)].push_back(pos.at(v));
        adj[pos.at(v)].push_back(pos.at(u));
    }
    std::vector<int> dist(kg.nodes.size(), -1);
    std::queue<std::size_t> q;
    dist[source] = 0;
    q.push(source);
    while (!q.empty()) {
        const std::size_t i = q.front();
        q.pop();
        for (std::size_t j : adj[i])
            if (dist[j] < 0) {
                dist[j] = dist[i] + 1;
                q.push(j);
            }
    }
    return dist;
}

}  // namespace detail

// Checks a layout graph against parsed constraints. Refs resolve to nodes by
// class and descending-area instance index (an unindexed ref is instance 1).
// Rules whose constraint section is absent report not_applicable, except that
// rule (d) always fails on an isolated room.
inline ComplianceReport check_compliance(const KnowledgeGraph& kg, const ConstraintSet& cs,
                                         const ComplianceOptions& opt = {}) {
    ComplianceReport rep;
    for (Rule r : kAllRules) rep.rules[static_cast<std::size_t>(r)].rule = r;
    auto set = [&](Rule r, RuleStatus s, std::string details) {
        rep.rules[static_cast<std::size_t>(r)].status = s;
        rep.rules[static_cast<std::size_t>(r)].details = std::move(details);
    };
    auto violate = [&](Rule r, std::string msg, std::vector<std::string> refs = {}) {
        rep.violations.push_back({r, std::move(msg), std::move(refs)});
    };
    auto node_of = [&](const RoomRef& r) { return kg.find(r.room_class, r.resolved_index()); };

    // (a) counts: every class either side must agree.
    if (cs.counts) {
        std::set<Label> classes;
        for (const auto& [c, k] : *cs.counts) classes.insert(c);
        for (const auto& n : kg.nodes) classes.insert(n.room_class);
        int bad = 0;
        for (Label c : classes) {
            auto it = cs.counts->find(c);
            const int want = it == cs.counts->end() ? 0 : it->second;
            const int have = kg.count(c);
            if (want != have) {
                ++bad;
                violate(Rule::counts,
                        class_token(c) + ": expected " + std::to_string(want) + ", found " +
                            std::to_string(have),
                        {class_token(c)});
            }
        }
        set(Rule::counts, bad ? RuleStatus::fail : RuleStatus::pass,
            std::to_string(classes.size() - bad) + "/" + std::to_string(classes.size()) +
                " class counts match");
    } else {
        set(Rule::counts, RuleStatus::not_applicable, "no count section");
    }

    // (b) areas within relative tolerance of the layout's own area token.
    if (cs.areas) {
        if (!opt.area_divisor)
            throw Error("MissingAreaDivisor", "area constraints need an area divisor");
        int bad = 0;
        for (const auto& a : *cs.areas) {
            const RoomNode* n = node_of(a.ref);
            if (!n) {
                ++bad;
                violate(Rule::areas, ref_token(a.ref) + ": no such room", {ref_token(a.ref)});
                continue;
            }
            const long long have = area_token(n->pixel_area, *opt.area_divisor);
            const double diff = std::abs(static_cast<double>(a.area - have));
            if (diff > opt.area_rel_tolerance * static_cast<double>(have)) {
                ++bad;
                violate(Rule::areas,
                        ref_token(a.ref) + ": expected area " + std::to_string(a.area) +
                            ", found " + std::to_string(have),
                        {ref_token(a.ref)});
            }
        }
        set(Rule::areas, bad ? RuleStatus::fail : RuleStatus::pass,
            std::to_string(cs.areas->size() - bad) + "/" + std::to_string(cs.areas->size()) +
                " areas within tolerance");
    } else {
        set(Rule::areas, RuleStatus::not_applicable, "no area section");
    }

    // (c) every class the constraints name must exist.
    if (!cs.empty()) {
        std::set<Label> named;
        if (cs.counts)
            for (const auto& [c, k] : *cs.counts)
                if (k > 0) named.insert(c);
        if (cs.areas)
            for (const auto& a : *cs.areas) named.insert(a.ref.room_class);
        if (cs.connections)
            for (const auto& c : *cs.connections) {
                named.insert(c.a.room_class);
                named.insert(c.b.room_class);
            }
        int bad = 0;
        for (Label c : named)
            if (kg.count(c) == 0) {
                ++bad;
                violate(Rule::existence, class_token(c) + ": required but absent", {class_token(c)});
            }
        set(Rule::existence, bad ? RuleStatus::fail : RuleStatus::pass,
            std::to_string(named.size() - bad) + "/" + std::to_string(named.size()) +
                " required classes present");
    } else {
        set(Rule::existence, RuleStatus::not_applicable, "no constraints");
    }

    // (d) no isolated rooms, and every stated connection present.
    {
        int isolated = 0;
        if (kg.nodes.size() > 1)
            for (const auto& n : kg.nodes)
                if (kg.degree(n.id) == 0) {
                    ++isolated;
                    const RoomRef r = detail::node_ref(kg, n);
                    violate(Rule::connectivity, ref_token(r) + ": isolated room", {ref_token(r)});
                }
        int missing = 0;
        if (cs.connections) {
            for (const auto& c : *cs.connections) {
                const RoomNode* u = node_of(c.a);
                const RoomNode* v = node_of(c.b);
                if (!u || !v || u->id == v->id || !kg.adjacent(u->id, v->id)) {
                    ++missing;
                    violate(Rule::connectivity,
                            ref_token(c.a) + " connect " + ref_token(c.b) + ": not adjacent",
                            {ref_token(c.a), ref_token(c.b)});
                }
            }
        }
        std::string details = std::to_string(isolated) + " isolated rooms";
        if (cs.connections)
            details += ", " + std::to_string(cs.connections->size() - missing) + "/" +
                       std::to_string(cs.connections->size()) + " connections present";
        RuleStatus s = (isolated || missing) ? RuleStatus::fail
                       : cs.connections     ? RuleStatus::pass
                                            : RuleStatus::not_applicable;
        set(Rule::connectivity, s, details);
    }

    // (e) circulation from the (largest) living room.
    if (const RoomNode* living = kg.find(Label::living, 1)) {
        std::size_t src = 0;
        while (kg.nodes[src].id != living->id) ++src;
        const auto dist = detail::hop_distances(kg, src);
        int unreachable = 0, longest = 0;
        for (int d : dist) {
            if (d < 0) ++unreachable;
            longest = std::max(longest, d);
        }
        std::string details = "max hops from living room " + std::to_string(longest) + ", " +
                              std::to_string(unreachable) + " unreachable";
        if (opt.max_path_length) {
            const bool ok = unreachable == 0 && longest <= *opt.max_path_length;
            if (!ok) violate(Rule::circulation, details);
            set(Rule::circulation, ok ? RuleStatus::pass : RuleStatus::fail, details);
        } else {
            set(Rule::circulation, RuleStatus::not_applicable, details + " (report only)");
        }
    } else {
        set(Rule::circulation, RuleStatus::not_applicable, "no living room");
    }

    // (f) compactness = room pixels / interior pixels.
    if (opt.interior_pixels && *opt.interior_pixels > 0) {
        long long rooms = 0;
        for (const auto& n : kg.nodes) rooms += n.pixel_area;
        const double ratio = static_cast<double>(rooms) / static_cast<double>(*opt.interior_pixels);
        std::string details = "compactness " + detail::fmt_ratio(ratio);
        if (opt.min_compactness) {
            const bool ok = ratio >= *opt.min_compactness;
            if (!ok) violate(Rule::compactness, details + " below " + detail::fmt_ratio(*opt.min_compactness));
            set(Rule::compactness, ok ? RuleStatus::pass : RuleStatus::fail, details);
        } else {
            set(Rule::compactness, RuleStatus::not_applicable, details + " (report only)");
        }
    } else {
        set(Rule::compactness, RuleStatus::not_applicable, "interior area unknown");
    }

    // (g) adjacency norms, judged only when both classes are present.
    {
        int applicable = 0, bad = 0;
        for (const auto& norm : opt.norms) {
            if (kg.count(norm.a) == 0 || kg.count(norm.b) == 0) continue;
            ++applicable;
            bool found = false;
            for (const auto& [u, v] : kg.edges) {
                const Label cu = kg.find(u)->room_class, cv = kg.find(v)->room_class;
                found = found || (cu == norm.a && cv == norm.b) || (cu == norm.b && cv == norm.a);
            }
            if (!found) {
                ++bad;
                violate(Rule::design_norms,
                        class_token(norm.a) + " not adjacent to " + class_token(norm.b),
                        {class_token(norm.a), class_token(norm.b)});
            }
        }
        set(Rule::design_norms,
            applicable == 0 ? RuleStatus::not_applicable
            : bad           ? RuleStatus::fail
                            : RuleStatus::pass,
            std::to_string(applicable - bad) + "/" + std::to_string(applicable) +
                " applicable norms hold");
    }
    return rep;
}

}  // namespace planforge
