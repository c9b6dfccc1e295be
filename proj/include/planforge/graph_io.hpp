#pragma once

#include <string>
#include <string_view>

#include "planforge/graph.hpp"
#include "planforge/json_util.hpp"

namespace planforge {

// Graph document:
//   {"image_width": W, "image_height": H,
//    "nodes": [{"id", "class", "index", "area", "bbox": [x0,y0,x1,y1],
//               "center": [cx,cy], "radius"}, ...],
//    "edges": [[u, v], ...]}
// Unknown fields are rejected. Edges are written with u < v in ascending order.
inline jsonutil::Json graph_to_json(const KnowledgeGraph& kg) {
    using jsonutil::Json;
    Json doc = Json::object();
    doc["image_width"] = kg.image_width;
    doc["image_height"] = kg.image_height;
    Json nodes = Json::array();
    for (const auto& n : kg.nodes) {
        Json j = Json::object();
        j["id"] = n.id;
        j["class"] = std::string(label_name(n.room_class));
        j["index"] = n.instance_index;
        j["area"] = n.pixel_area;
        j["bbox"] = Json::array({n.bbox.x0, n.bbox.y0, n.bbox.x1, n.bbox.y1});
        j["center"] = Json::array({n.cx, n.cy});
        j["radius"] = n.radius;
        nodes.push_back(std::move(j));
    }
    doc["nodes"] = std::move(nodes);
    Json edges = Json::array();
    for (const auto& [u, v] : kg.edges) edges.push_back(Json::array({u, v}));
    doc["edges"] = std::move(edges);
    return doc;
}

inline std::string serialize_graph(const KnowledgeGraph& kg) {
    return graph_to_json(kg).dump(2) + "\n";
}

inline KnowledgeGraph graph_from_json(const jsonutil::Json& doc) {
    using namespace jsonutil;
    require_object(doc, "graph");
    only_fields(doc, {"image_width", "image_height", "nodes", "edges"}, "graph");

    KnowledgeGraph kg;
    kg.image_width = static_cast<int>(as_int(field(doc, "image_width", "graph"), "image_width"));
    kg.image_height = static_cast<int>(as_int(field(doc, "image_height", "graph"), "image_height"));

    const Json& nodes = require_array(field(doc, "nodes", "graph"), "nodes");
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const std::string where = "nodes[" + std::to_string(i) + "]";
        const Json& j = require_object(nodes[i], where);
        only_fields(j, {"id", "class", "index", "area", "bbox", "center", "radius"}, where);
        RoomNode n;
        n.id = static_cast<int>(as_int(field(j, "id", where), where + ".id"));
        const std::string& cls = as_string(field(j, "class", where), where + ".class");
        auto label = label_from_name(cls);
        if (!label || !is_room(*label)) schema_error(where + ".class", "not a room class: " + cls);
        n.room_class = *label;
        n.instance_index = static_cast<int>(as_int(field(j, "index", where), where + ".index"));
        n.pixel_area = as_int(field(j, "area", where), where + ".area");
        const Json& bbox = require_array(field(j, "bbox", where), where + ".bbox");
        if (bbox.size() != 4) schema_error(where + ".bbox", "expected 4 integers");
        n.bbox = {static_cast<int>(as_int(bbox[0], where + ".bbox")),
                  static_cast<int>(as_int(bbox[1], where + ".bbox")),
                  static_cast<int>(as_int(bbox[2], where + ".bbox")),
                  static_cast<int>(as_int(bbox[3], where + ".bbox"))};
        const Json& center = require_array(field(j, "center", where), where + ".center");
        if (center.size() != 2) schema_error(where + ".center", "expected 2 numbers");
        n.cx = as_number(center[0], where + ".center");
        n.cy = as_number(center[1], where + ".center");
        n.radius = as_number(field(j, "radius", where), where + ".radius");
        kg.nodes.push_back(n);
    }

    const Json& edges = require_array(field(doc, "edges", "graph"), "edges");
    for (std::size_t i = 0; i < edges.size(); ++i) {
        const std::string where = "edges[" + std::to_string(i) + "]";
        const Json& e = require_array(edges[i], where);
        if (e.size() != 2) schema_error(where, "expected a pair of node ids");
        const int u = static_cast<int>(as_int(e[0], where));
        const int v = static_cast<int>(as_int(e[1], where));
        if (u == v) throw Error("InvariantViolation", where + ": self edge on node " + std::to_string(u));
        if (!kg.edges.insert(make_edge(u, v)).second)
            throw Error("InvariantViolation", where + ": duplicate edge");
    }
    validate(kg);
    return kg;
}

inline KnowledgeGraph deserialize_graph(std::string_view text) {
    return graph_from_json(jsonutil::parse(text));
}

}  // namespace planforge
