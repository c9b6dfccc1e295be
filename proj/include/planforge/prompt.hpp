#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <compare>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "planforge/error.hpp"
#include "planforge/graph.hpp"

namespace planforge {

// A room named in a prompt: "bathroom" (no index) or "bedroom_2".
struct RoomRef {
    Label room_class = Label::living;
    std::optional<int> index;

    // Index used to pick a graph node; an unindexed ref means instance 1.
    int resolved_index() const noexcept { return index.value_or(1); }

    friend auto operator<=>(const RoomRef&, const RoomRef&) = default;
    friend bool operator==(const RoomRef&, const RoomRef&) = default;
};

struct AreaConstraint {
    RoomRef ref;
    long long area = 0;

    friend auto operator<=>(const AreaConstraint&, const AreaConstraint&) = default;
    friend bool operator==(const AreaConstraint&, const AreaConstraint&) = default;
};

struct Connection {
    RoomRef a, b;

    // Unordered pair in canonical orientation.
    Connection normalized() const { return b < a ? Connection{b, a} : *this; }

    friend auto operator<=>(const Connection&, const Connection&) = default;
    friend bool operator==(const Connection&, const Connection&) = default;
};

// Parsed prompt. Each section is independently optional; areas and
// connections keep every clause in input order, duplicates included.
struct ConstraintSet {
    std::optional<std::map<Label, int>> counts;
    std::optional<std::vector<AreaConstraint>> areas;
    std::optional<std::vector<Connection>> connections;

    bool empty() const noexcept { return !counts && !areas && !connections; }

    // Order-insensitive comparison; connections compare as unordered pairs.
    friend bool operator==(const ConstraintSet& x, const ConstraintSet& y) {
        auto sorted_areas = [](const ConstraintSet& c) {
            auto v = *c.areas;
            std::sort(v.begin(), v.end());
            return v;
        };
        auto sorted_connections = [](const ConstraintSet& c) {
            std::vector<Connection> v;
            for (const auto& k : *c.connections) v.push_back(k.normalized());
            std::sort(v.begin(), v.end());
            return v;
        };
        if (x.counts != y.counts) return false;
        if (x.areas.has_value() != y.areas.has_value()) return false;
        if (x.connections.has_value() != y.connections.has_value()) return false;
        if (x.areas && sorted_areas(x) != sorted_areas(y)) return false;
        if (x.connections && sorted_connections(x) != sorted_connections(y)) return false;
        return true;
    }
};

struct Sections {
    bool counts = true;
    bool areas = true;
    bool connections = true;
};

// Prompt spelling of a room class.
inline std::string class_token(Label room_class) {
    return room_class == Label::living ? "living_room" : std::string(label_name(room_class));
}

// Connection spelling: "bedroom_1", "bathroom".
inline std::string ref_token(const RoomRef& ref) {
    std::string s = class_token(ref.room_class);
    if (ref.index) s += "_" + std::to_string(*ref.index);
    return s;
}

// Area spelling: "bedroom1", "bathroom".
inline std::string area_ref_token(const RoomRef& ref) {
    std::string s = class_token(ref.room_class);
    if (ref.index) s += std::to_string(*ref.index);
    return s;
}

// Area tokens are pixel areas divided by a configured divisor, rounded half away
// from zero and floored at 1 so every room keeps a positive token.
inline long long area_token(long long pixel_area, double area_divisor) {
    if (!(area_divisor > 0.0) || !std::isfinite(area_divisor))
        throw Error("InvalidParameter", "area divisor must be a positive number");
    return std::max(1LL, std::llround(static_cast<double>(pixel_area) / area_divisor));
}

namespace detail {

// Classes with more than one instance carry an index in every reference.
inline RoomRef node_ref(const KnowledgeGraph& kg, const RoomNode& n) {
    RoomRef r{n.room_class, std::nullopt};
    if (kg.count(n.room_class) > 1) r.index = n.instance_index;
    return r;
}

// Position of each node id in the node list; edges are emitted in list order.
inline std::vector<std::pair<int, int>> ordered_edges(const KnowledgeGraph& kg) {
    std::map<int, int> pos;
    for (std::size_t i = 0; i < kg.nodes.size(); ++i) pos[kg.nodes[i].id] = static_cast<int>(i);
    std::vector<std::pair<int, int>> out;
    for (const auto& [u, v] : kg.edges) {
        int pu = pos.at(u), pv = pos.at(v);
        if (pu > pv) std::swap(pu, pv);
        out.emplace_back(pu, pv);
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace detail

// The ConstraintSet a prompt for `kg` expresses. Sections that are switched
// off or would hold no clause are absent, since a prompt cannot tell an empty
// section from a missing one.
inline ConstraintSet kg_to_constraints(const KnowledgeGraph& kg, double area_divisor,
                                       Sections include = {}) {
    ConstraintSet cs;
    if (include.counts && !kg.nodes.empty()) {
        cs.counts.emplace();
        for (const auto& n : kg.nodes) ++(*cs.counts)[n.room_class];
    }
    if (include.areas && !kg.nodes.empty()) {
        cs.areas.emplace();
        for (const auto& n : kg.nodes)
            cs.areas->push_back({detail::node_ref(kg, n), area_token(n.pixel_area, area_divisor)});
    }
    if (include.connections && !kg.edges.empty()) {
        cs.connections.emplace();
        for (const auto& [pu, pv] : detail::ordered_edges(kg))
            cs.connections->push_back(
                {detail::node_ref(kg, kg.nodes[pu]), detail::node_ref(kg, kg.nodes[pv])});
    }
    return cs;
}

// "<p>The room has 2_bedroom, ..., bedroom1_space_17, ..., bedroom_1 connect bathroom, ....</p>"
// Counts follow the first appearance of each class in the node list, areas
// follow the node list and connections follow node-list order of their ends.
inline std::string emit_prompt(const KnowledgeGraph& kg, double area_divisor, Sections include = {}) {
    if (include.counts && kg.nodes.empty())
        throw Error("EmptyGraph", "cannot emit room counts for a graph without rooms");
    if (include.areas) area_token(1, area_divisor);  // validates the divisor

    std::vector<std::string> clauses;
    if (include.counts) {
        std::vector<Label> order;
        for (const auto& n : kg.nodes)
            if (std::find(order.begin(), order.end(), n.room_class) == order.end())
                order.push_back(n.room_class);
        for (Label c : order) clauses.push_back(std::to_string(kg.count(c)) + "_" + class_token(c));
    }
    if (include.areas) {
        for (const auto& n : kg.nodes)
            clauses.push_back(area_ref_token(detail::node_ref(kg, n)) + "_space_" +
                              std::to_string(area_token(n.pixel_area, area_divisor)));
    }
    if (include.connections) {
        for (const auto& [pu, pv] : detail::ordered_edges(kg))
            clauses.push_back(ref_token(detail::node_ref(kg, kg.nodes[pu])) + " connect " +
                              ref_token(detail::node_ref(kg, kg.nodes[pv])));
    }

    std::string text = "<p>The room has";
    for (std::size_t i = 0; i < clauses.size(); ++i) text += (i == 0 ? " " : ", ") + clauses[i];
    return text + ".</p>";
}

namespace detail {

// A clause with whitespace removed and letters lower-cased; `origin` maps each
// kept character back to its byte offset in the source text.
struct Compact {
    std::string text;
    std::vector<std::size_t> origin;
    std::size_t end = 0;  // source offset one past the clause

    std::size_t at(std::size_t i) const { return i < origin.size() ? origin[i] : end; }
};

inline bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

inline std::optional<long long> parse_digits(std::string_view s) {
    if (s.empty() || s.size() > 12) return std::nullopt;
    long long v = 0;
    for (char c : s) {
        if (c < '0' || c > '9') return std::nullopt;
        v = v * 10 + (c - '0');
    }
    return v;
}

// Class spellings, longest first so "living_room" wins over "living".
inline const std::vector<std::pair<std::string, Label>>& class_spellings() {
    static const std::vector<std::pair<std::string, Label>> spellings = {
        {"living_room", Label::living}, {"bathroom", Label::bathroom}, {"bedroom", Label::bedroom},
        {"kitchen", Label::kitchen},    {"balcony", Label::balcony},   {"storage", Label::storage},
        {"living", Label::living},
    };
    return spellings;
}

// Parses "<class>", "<class>_<k>" or "<class><k>" spanning compact[b, e).
inline RoomRef parse_ref(const Compact& c, std::size_t b, std::size_t e) {
    const std::string_view s = std::string_view(c.text).substr(b, e - b);
    for (const auto& [spelling, label] : class_spellings()) {
        if (s.substr(0, spelling.size()) != spelling) continue;
        std::string_view rest = s.substr(spelling.size());
        if (rest.empty()) return {label, std::nullopt};
        if (rest.front() == '_') rest.remove_prefix(1);
        auto idx = parse_digits(rest);
        if (!idx) continue;  // e.g. "living" matched a prefix of something else
        if (*idx < 1 || *idx > 1'000'000)
            throw ParseError(c.at(e - rest.size()), "room index >= 1");
        return {label, static_cast<int>(*idx)};
    }
    throw ParseError(c.at(b), "room reference (e.g. bedroom_1, kitchen)");
}

}  // namespace detail

// Tolerant parser for the prompt grammar. Accepts an optional "<p>...</p>"
// wrapper, an optional "The room has" lead, an optional final period and any
// mix of count ("2_bedroom"), area ("bedroom1_space_17" or
// "bedroom_1_space_17") and connection ("bedroom_1 connect bathroom") clauses
// separated by commas. Whitespace inside a clause is ignored, so text with
// stray line-break spaces ("be droom1_space_17") still parses.
inline ConstraintSet parse_prompt(std::string_view text) {
    using detail::is_space;
    std::size_t b = 0, e = text.size();
    auto trim = [&] {
        while (b < e && is_space(text[b])) ++b;
        while (e > b && is_space(text[e - 1])) --e;
    };
    trim();
    if (b == e) throw ParseError(0, "prompt text");

    if (text.substr(b, 3) == "<p>") {
        b += 3;
        if (e - b < 4 || text.substr(e - 4, 4) != "</p>") throw ParseError(e, "closing </p>");
        e -= 4;
        trim();
    }

    // Optional lead words, matched case-insensitively.
    {
        std::size_t p = b;
        bool ok = true;
        for (std::string_view word : {"the", "room", "has"}) {
            while (p < e && is_space(text[p])) ++p;
            std::size_t q = 0;
            while (q < word.size() && p + q < e &&
                   std::tolower(static_cast<unsigned char>(text[p + q])) == word[q])
                ++q;
            if (q != word.size() || (p + q < e && std::isalnum(static_cast<unsigned char>(text[p + q])))) {
                ok = false;
                break;
            }
            p += q;
        }
        if (ok) b = p;
        trim();
    }
    if (b < e && text[e - 1] == '.') {
        --e;
        trim();
    }

    ConstraintSet cs;
    if (b == e) return cs;

    std::size_t start = b;
    while (start <= e) {
        std::size_t stop = start;
        while (stop < e && text[stop] != ',') ++stop;

        detail::Compact c;
        c.end = stop;
        for (std::size_t i = start; i < stop; ++i) {
            if (is_space(text[i])) continue;
            c.text.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(text[i]))));
            c.origin.push_back(i);
        }
        if (c.text.empty()) throw ParseError(start, "clause between commas");

        const std::string& s = c.text;
        if (auto k = s.find("connect"); k != std::string::npos) {
            if (k == 0) throw ParseError(c.at(0), "room reference before \"connect\"");
            if (k + 7 == s.size()) throw ParseError(c.end, "room reference after \"connect\"");
            RoomRef a = detail::parse_ref(c, 0, k);
            RoomRef r = detail::parse_ref(c, k + 7, s.size());
            if (!cs.connections) cs.connections.emplace();
            cs.connections->push_back({a, r});
        } else if (auto k2 = s.find("_space_"); k2 != std::string::npos) {
            if (k2 == 0) throw ParseError(c.at(0), "room reference before \"_space_\"");
            RoomRef r = detail::parse_ref(c, 0, k2);
            auto area = detail::parse_digits(std::string_view(s).substr(k2 + 7));
            if (!area || *area < 1) throw ParseError(c.at(k2 + 7), "positive integer area");
            if (!cs.areas) cs.areas.emplace();
            cs.areas->push_back({r, *area});
        } else {
            auto u = s.find('_');
            auto n = u == std::string::npos ? std::nullopt
                                            : detail::parse_digits(std::string_view(s).substr(0, u));
            if (!n)
                throw ParseError(c.at(0), "count token (k_class), area token (class_space_A) "
                                          "or connection clause (ref connect ref)");
            RoomRef r = detail::parse_ref(c, u + 1, s.size());
            if (r.index) throw ParseError(c.at(u + 1), "room class without index in count token");
            if (!cs.counts) cs.counts.emplace();
            if (!cs.counts->emplace(r.room_class, static_cast<int>(*n)).second)
                throw ParseError(c.at(0), "a single count token per room class");
        }
        start = stop + 1;
    }
    return cs;
}

struct ConsistencyWarning {
    enum class Kind { IndexExceedsCount, DuplicateConnection, DuplicateArea };

    Kind kind;
    RoomRef ref;
    std::optional<RoomRef> other;

    std::string code() const {
        switch (kind) {
            case Kind::IndexExceedsCount: return "IndexExceedsCount";
            case Kind::DuplicateConnection: return "DuplicateConnection";
            case Kind::DuplicateArea: return "DuplicateArea";
        }
        return {};
    }

    std::string message() const {
        switch (kind) {
            case Kind::IndexExceedsCount:
                return ref_token(ref) + ": index " + std::to_string(ref.resolved_index()) +
                       " exceeds the declared " + class_token(ref.room_class) + " count";
            case Kind::DuplicateConnection:
                return "connection " + ref_token(ref) + " connect " + ref_token(*other) +
                       " is stated more than once";
            case Kind::DuplicateArea:
                return "area of " + ref_token(ref) + " is stated more than once";
        }
        return {};
    }

    friend bool operator==(const ConsistencyWarning&, const ConsistencyWarning&) = default;
};

// Warnings, never errors: a ref past its class count (only when counts are
// present), repeated connections in either orientation and repeated area refs.
// Each distinct problem is reported once.
inline std::vector<ConsistencyWarning> check_consistency(const ConstraintSet& cs) {
    using Kind = ConsistencyWarning::Kind;
    std::vector<ConsistencyWarning> out;

    if (cs.counts) {
        std::set<std::pair<Label, int>> reported;
        auto check = [&](const RoomRef& r) {
            auto it = cs.counts->find(r.room_class);
            const int declared = it == cs.counts->end() ? 0 : it->second;
            if (r.resolved_index() > declared &&
                reported.emplace(r.room_class, r.resolved_index()).second)
                out.push_back({Kind::IndexExceedsCount, r, std::nullopt});
        };
        if (cs.areas)
            for (const auto& a : *cs.areas) check(a.ref);
        if (cs.connections)
            for (const auto& c : *cs.connections) {
                check(c.a);
                check(c.b);
            }
    }
    if (cs.areas) {
        std::set<RoomRef> seen, reported;
        for (const auto& a : *cs.areas)
            if (!seen.insert(a.ref).second && reported.insert(a.ref).second)
                out.push_back({Kind::DuplicateArea, a.ref, std::nullopt});
    }
    if (cs.connections) {
        std::set<Connection> seen, reported;
        for (const auto& c : *cs.connections) {
            const Connection k = c.normalized();
            if (!seen.insert(k).second && reported.insert(k).second)
                out.push_back({Kind::DuplicateConnection, k.a, k.b});
        }
    }
    return out;
}

}  // namespace planforge
