#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <utility>
#include <vector>

#include "planforge/error.hpp"
#include "planforge/raster.hpp"

namespace planforge {

// Inclusive pixel rectangle.
struct BBox {
    int x0 = 0, y0 = 0, x1 = 0, y1 = 0;

    int width() const noexcept { return x1 - x0 + 1; }
    int height() const noexcept { return y1 - y0 + 1; }
    long long area() const noexcept { return static_cast<long long>(width()) * height(); }

    BBox expanded(int d) const noexcept { return {x0 - d, y0 - d, x1 + d, y1 + d}; }

    friend bool operator==(const BBox&, const BBox&) = default;
};

// Closed-interval overlap: boxes that share only a border row or column intersect.
inline bool intersects(const BBox& a, const BBox& b) noexcept {
    return a.x0 <= b.x1 && b.x0 <= a.x1 && a.y0 <= b.y1 && b.y0 <= a.y1;
}

struct RoomMask {
    Label room_class = Label::living;
    std::vector<std::size_t> pixels;  // linear indices, ascending
    BBox bbox;
};

struct RoomNode {
    int id = 0;
    Label room_class = Label::living;
    int instance_index = 1;
    long long pixel_area = 0;
    BBox bbox;
    double cx = 0.0, cy = 0.0;
    double radius = 0.0;

    friend bool operator==(const RoomNode&, const RoomNode&) = default;
};

using Edge = std::pair<int, int>;  // stored with first < second

inline Edge make_edge(int u, int v) noexcept { return u < v ? Edge{u, v} : Edge{v, u}; }

struct KnowledgeGraph {
    int image_width = 0;
    int image_height = 0;
    std::vector<RoomNode> nodes;
    std::set<Edge> edges;

    const RoomNode* find(int id) const noexcept {
        for (const auto& n : nodes)
            if (n.id == id) return &n;
        return nullptr;
    }

    // Node of a class with a given 1-based instance index, if any.
    const RoomNode* find(Label room_class, int instance_index) const noexcept {
        for (const auto& n : nodes)
            if (n.room_class == room_class && n.instance_index == instance_index) return &n;
        return nullptr;
    }

    int count(Label room_class) const noexcept {
        return static_cast<int>(std::count_if(nodes.begin(), nodes.end(), [&](const RoomNode& n) {
            return n.room_class == room_class;
        }));
    }

    bool adjacent(int u, int v) const { return edges.count(make_edge(u, v)) > 0; }

    int degree(int id) const noexcept {
        int d = 0;
        for (const auto& [u, v] : edges) d += (u == id) + (v == id);
        return d;
    }

    friend bool operator==(const KnowledgeGraph&, const KnowledgeGraph&) = default;
};

// Throws InvariantViolation naming the first broken graph invariant.
inline void validate(const KnowledgeGraph& kg) {
    auto fail = [](const std::string& what) { throw Error("InvariantViolation", what); };
    if (kg.image_width < 0 || kg.image_height < 0) fail("negative image dimensions");

    std::set<int> ids;
    std::map<Label, std::vector<int>> indices;
    for (const auto& n : kg.nodes) {
        const std::string tag = "node " + std::to_string(n.id);
        if (!ids.insert(n.id).second) fail("duplicate node id " + std::to_string(n.id));
        if (!is_room(n.room_class)) fail(tag + ": class is not a room class");
        const BBox& b = n.bbox;
        if (b.x0 > b.x1 || b.y0 > b.y1) fail(tag + ": inverted bbox");
        if (b.x0 < 0 || b.y0 < 0 || b.x1 >= kg.image_width || b.y1 >= kg.image_height)
            fail(tag + ": bbox outside the image");
        if (n.pixel_area < 1 || n.pixel_area > b.area()) fail(tag + ": area inconsistent with bbox");
        if (n.cx != (b.x0 + b.x1) / 2.0 || n.cy != (b.y0 + b.y1) / 2.0)
            fail(tag + ": center is not the bbox midpoint");
        if (n.radius != static_cast<double>(b.width())) fail(tag + ": radius is not the bbox width");
        indices[n.room_class].push_back(n.instance_index);
    }
    for (auto& [cls, idx] : indices) {
        std::sort(idx.begin(), idx.end());
        for (std::size_t i = 0; i < idx.size(); ++i)
            if (idx[i] != static_cast<int>(i) + 1)
                fail(std::string(label_name(cls)) + ": instance indices are not 1..k");
    }
    for (const auto& [u, v] : kg.edges) {
        if (u == v) fail("self edge on node " + std::to_string(u));
        if (u > v) fail("edge not stored in canonical order");
        if (!ids.count(u) || !ids.count(v))
            fail("edge (" + std::to_string(u) + ", " + std::to_string(v) + ") names an unknown node");
    }
}

// One mask per 4-connected component of each room label, in raster order of
// each component's first pixel.
inline std::vector<RoomMask> segment_rooms(const RasterPlan& plan) {
    const Grid<Label>& labels = plan.labels;
    const int w = labels.width();
    const int h = labels.height();
    std::vector<std::uint8_t> seen(labels.size(), 0);
    std::vector<RoomMask> masks;
    std::vector<std::size_t> stack;

    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::size_t start = labels.index(x, y);
            const Label cls = labels[start];
            if (seen[start] || !is_room(cls)) continue;

            RoomMask mask;
            mask.room_class = cls;
            mask.bbox = {x, y, x, y};
            seen[start] = 1;
            stack.assign(1, start);
            while (!stack.empty()) {
                const std::size_t i = stack.back();
                stack.pop_back();
                mask.pixels.push_back(i);
                const int px = static_cast<int>(i % static_cast<std::size_t>(w));
                const int py = static_cast<int>(i / static_cast<std::size_t>(w));
                mask.bbox.x0 = std::min(mask.bbox.x0, px);
                mask.bbox.x1 = std::max(mask.bbox.x1, px);
                mask.bbox.y0 = std::min(mask.bbox.y0, py);
                mask.bbox.y1 = std::max(mask.bbox.y1, py);
                const int nx[4] = {px - 1, px + 1, px, px};
                const int ny[4] = {py, py, py - 1, py + 1};
                for (int k = 0; k < 4; ++k) {
                    if (!labels.contains(nx[k], ny[k])) continue;
                    const std::size_t j = labels.index(nx[k], ny[k]);
                    if (!seen[j] && labels[j] == cls) {
                        seen[j] = 1;
                        stack.push_back(j);
                    }
                }
            }
            std::sort(mask.pixels.begin(), mask.pixels.end());
            masks.push_back(std::move(mask));
        }
    }
    return masks;
}

// Edges between boxes that intersect after growing each by `dilation`.
// Sweep over x0; candidates are pruned once their x1 falls behind.
inline std::set<Edge> bbox_edges(const std::vector<std::pair<int, BBox>>& boxes, int dilation) {
    std::vector<std::pair<int, BBox>> grown;
    grown.reserve(boxes.size());
    for (const auto& [id, b] : boxes) grown.emplace_back(id, b.expanded(dilation));
    std::sort(grown.begin(), grown.end(), [](const auto& a, const auto& b) {
        return std::pair(a.second.x0, a.first) < std::pair(b.second.x0, b.first);
    });

    std::set<Edge> edges;
    std::vector<std::size_t> active;
    for (std::size_t i = 0; i < grown.size(); ++i) {
        const BBox& bi = grown[i].second;
        std::erase_if(active, [&](std::size_t j) { return grown[j].second.x1 < bi.x0; });
        for (std::size_t j : active)
            if (intersects(grown[j].second, bi))
                edges.insert(make_edge(grown[j].first, grown[i].first));
        active.push_back(i);
    }
    return edges;
}

// Nodes are ordered by room class, then instance index; ids follow that order.
// Instance indices count down from the largest room of each class, ties going
// to the box whose (y0, x0) comes first.
inline KnowledgeGraph extract_graph(const RasterPlan& plan, int dilation = 0) {
    if (dilation < 0)
        throw Error("InvalidParameter", "dilation must be >= 0, got " + std::to_string(dilation));
    auto masks = segment_rooms(plan);

    std::vector<RoomNode> nodes;
    nodes.reserve(masks.size());
    for (const auto& m : masks) {
        RoomNode n;
        n.room_class = m.room_class;
        n.pixel_area = static_cast<long long>(m.pixels.size());
        n.bbox = m.bbox;
        n.cx = (m.bbox.x0 + m.bbox.x1) / 2.0;
        n.cy = (m.bbox.y0 + m.bbox.y1) / 2.0;
        n.radius = static_cast<double>(m.bbox.width());
        nodes.push_back(n);
    }
    std::sort(nodes.begin(), nodes.end(), [](const RoomNode& a, const RoomNode& b) {
        if (a.room_class != b.room_class) return a.room_class < b.room_class;
        if (a.pixel_area != b.pixel_area) return a.pixel_area > b.pixel_area;
        return std::pair(a.bbox.y0, a.bbox.x0) < std::pair(b.bbox.y0, b.bbox.x0);
    });
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        nodes[i].id = static_cast<int>(i);
        nodes[i].instance_index =
            (i > 0 && nodes[i - 1].room_class == nodes[i].room_class)
                ? nodes[i - 1].instance_index + 1
                : 1;
    }

    std::vector<std::pair<int, BBox>> boxes;
    boxes.reserve(nodes.size());
    for (const auto& n : nodes) boxes.emplace_back(n.id, n.bbox);

    KnowledgeGraph kg;
    kg.image_width = plan.width();
    kg.image_height = plan.height();
    kg.nodes = std::move(nodes);
    kg.edges = bbox_edges(boxes, dilation);
    return kg;
}

}  // namespace planforge
