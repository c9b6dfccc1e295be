#pragma once

// Reference computations used to check the library. They deliberately take
// different routes from the production code.

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <tuple>
#include <vector>

#include "planforge/graph.hpp"

namespace oracle {

using planforge::BBox;
using planforge::Grid;
using planforge::Label;

struct Component {
    Label cls;
    long long area = 0;
    BBox box;
};

// Connected components by union-find over 4-neighbor pairs.
inline std::vector<Component> components(const Grid<Label>& g) {
    const int w = g.width(), h = g.height();
    std::vector<std::size_t> parent(g.size());
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t i) {
        while (parent[i] != i) i = parent[i] = parent[parent[i]];
        return i;
    };
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (!planforge::is_room(g(x, y))) continue;
            if (x + 1 < w && g(x + 1, y) == g(x, y)) parent[find(g.index(x + 1, y))] = find(g.index(x, y));
            if (y + 1 < h && g(x, y + 1) == g(x, y)) parent[find(g.index(x, y + 1))] = find(g.index(x, y));
        }
    std::map<std::size_t, Component> by_root;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (!planforge::is_room(g(x, y))) continue;
            auto [it, fresh] = by_root.try_emplace(find(g.index(x, y)));
            Component& c = it->second;
            if (fresh) {
                c.cls = g(x, y);
                c.box = {x, y, x, y};
            }
            ++c.area;
            c.box.x0 = std::min(c.box.x0, x);
            c.box.y0 = std::min(c.box.y0, y);
            c.box.x1 = std::max(c.box.x1, x);
            c.box.y1 = std::max(c.box.y1, y);
        }
    std::vector<Component> out;
    for (auto& [root, c] : by_root) out.push_back(c);
    return out;
}

using NodeKey = std::tuple<int, long long, int, int, int, int>;  // class, area, box

inline NodeKey key(Label cls, long long area, const BBox& b) {
    return {static_cast<int>(cls), area, b.x0, b.y0, b.x1, b.y1};
}

// Edge set over all pairs by direct interval comparison of the grown boxes.
inline std::multiset<std::pair<NodeKey, NodeKey>> brute_force_edges(
    const std::vector<Component>& comps, int dilation) {
    std::multiset<std::pair<NodeKey, NodeKey>> edges;
    for (std::size_t i = 0; i < comps.size(); ++i)
        for (std::size_t j = i + 1; j < comps.size(); ++j) {
            const BBox& a = comps[i].box;
            const BBox& b = comps[j].box;
            const bool x_overlap = !(a.x1 + dilation < b.x0 - dilation || b.x1 + dilation < a.x0 - dilation);
            const bool y_overlap = !(a.y1 + dilation < b.y0 - dilation || b.y1 + dilation < a.y0 - dilation);
            if (x_overlap && y_overlap) {
                auto ka = key(comps[i].cls, comps[i].area, a);
                auto kb = key(comps[j].cls, comps[j].area, b);
                edges.emplace(std::min(ka, kb), std::max(ka, kb));
            }
        }
    return edges;
}

inline std::multiset<std::pair<NodeKey, NodeKey>> graph_edges(const planforge::KnowledgeGraph& kg) {
    std::multiset<std::pair<NodeKey, NodeKey>> edges;
    for (const auto& [u, v] : kg.edges) {
        const auto* a = kg.find(u);
        const auto* b = kg.find(v);
        auto ka = key(a->room_class, a->pixel_area, a->bbox);
        auto kb = key(b->room_class, b->pixel_area, b->bbox);
        edges.emplace(std::min(ka, kb), std::max(ka, kb));
    }
    return edges;
}

inline std::multiset<NodeKey> graph_nodes(const planforge::KnowledgeGraph& kg) {
    std::multiset<NodeKey> s;
    for (const auto& n : kg.nodes) s.insert(key(n.room_class, n.pixel_area, n.bbox));
    return s;
}

inline std::multiset<NodeKey> component_nodes(const std::vector<Component>& comps) {
    std::multiset<NodeKey> s;
    for (const auto& c : comps) s.insert(key(c.cls, c.area, c.box));
    return s;
}

}  // namespace oracle
