#pragma once

// Hand-built graphs and reference prompt texts shared by the prompt,
// compliance and acceptance suites.

#include <random>
#include <regex>
#include <string>

#include "planforge/graph.hpp"

namespace fixtures {

using planforge::BBox;
using planforge::KnowledgeGraph;
using planforge::Label;
using planforge::RoomNode;

// Verbatim prompt rows, including the stray spaces of the source text.
inline const std::string kReferencePromptRow1 =
    "<p>The room has 2_bedroom, 1_bathroom, 1_living_room, 1_kitchen,1_balcony, "
    "bedroom1_space_17, bathroom_space_5, living_room_space_73, bedroom2_space_11, "
    "kitchen_space_5, balcony_space_7, bedroom_1 connect bathroom,bedroom_1 connect "
    "living_room,bedroom_1 connect balcony, bathroom connect living_room, bathroom connect "
    "bedroom_2,living_room connect bedroom_2,living_room connect kitchen, living_room connect "
    "balcony,bedroom_2 connect kitchen.</p>";

inline const std::string kReferencePromptRow2 =
    "<p>The room has 2_bedroom,1_bathroom,1_living_room,1_kitchen,1_balcony,be "
    "droom1_space_17,bathroom_space_5,living_room_space_73,be "
    "droom2_space_11,kitchen_space_5,balcony_space_7, bedroom_1 connect bedroom_2,bedroom_1 "
    "connect balcony,bedroom_1 connect living_room,bedroom_2 connect bedroom_3,bedroom_2 connect "
    "balcony,bedroom_2 connect living_room,bedroom_3 connect living_room, kitchen connect "
    "bathroom, kitchen connect living_room, bathroom connect living_room.</p>";

inline const std::string kReferencePromptRow3 =
    "<p>The room has 3_bedroom,1_balcony,1_living_room,1_bathroom,1_kitchen,be "
    "droom1_space_20,balcony_space_3,living_room_space_33,bedr "
    "oom2_space_18,bathroom_space_3,kitchen_space_7,bedroom3_ space_7, bedroom_1 connect "
    "balcony,bedroom_1 connect living_room,bedroom_1 connect bedroom_2,balcony connect "
    "bedroom_2,living_room connect bedroom_2,living_room connect bathroom, living_room connect "
    "kitchen, living_room connect bedroom_3,bedroom_2 connect bathroom, kitchen connect "
    "bedroom_3.</p>";

// Collapses the comma spacing of a prompt to ", ".
inline std::string normalize_commas(const std::string& s) {
    return std::regex_replace(s, std::regex(R"(\s*,\s*)"), ", ");
}

inline RoomNode node(int id, Label cls, int index, long long area, BBox box) {
    RoomNode n;
    n.id = id;
    n.room_class = cls;
    n.instance_index = index;
    n.pixel_area = area;
    n.bbox = box;
    n.cx = (box.x0 + box.x1) / 2.0;
    n.cy = (box.y0 + box.y1) / 2.0;
    n.radius = box.width();
    return n;
}

// Row-1 layout with areas chosen so that a divisor of 100 gives the row's
// area tokens.
inline KnowledgeGraph reference_row1_graph() {
    KnowledgeGraph kg;
    kg.image_width = 256;
    kg.image_height = 256;
    kg.nodes = {
        node(0, Label::bedroom, 1, 1700, {0, 0, 49, 49}),
        node(1, Label::bathroom, 1, 500, {50, 0, 79, 29}),
        node(2, Label::living, 1, 7300, {0, 50, 99, 149}),
        node(3, Label::bedroom, 2, 1100, {100, 0, 139, 39}),
        node(4, Label::kitchen, 1, 500, {100, 50, 129, 79}),
        node(5, Label::balcony, 1, 700, {0, 150, 39, 189}),
    };
    kg.edges = {{0, 1}, {0, 2}, {0, 5}, {1, 2}, {1, 3}, {2, 3}, {2, 4}, {2, 5}, {3, 4}};
    return kg;
}

// Random valid graph: 0..max_nodes rooms with random classes, areas and edges.
inline KnowledgeGraph random_graph(std::mt19937_64& rng, int max_nodes = 10) {
    std::uniform_int_distribution<int> count_d(0, max_nodes);
    std::uniform_int_distribution<int> cls_d(0, planforge::kRoomClassCount - 1);
    std::uniform_int_distribution<int> side_d(5, 60);
    std::uniform_int_distribution<int> pos_d(0, 190);
    std::bernoulli_distribution edge_d(0.4);

    KnowledgeGraph kg;
    kg.image_width = 256;
    kg.image_height = 256;
    const int n = count_d(rng);
    int per_class[planforge::kRoomClassCount] = {};
    for (int i = 0; i < n; ++i) {
        const Label cls = planforge::kRoomClasses[cls_d(rng)];
        const int w = side_d(rng), h = side_d(rng);
        const int x0 = pos_d(rng), y0 = pos_d(rng);
        std::uniform_int_distribution<long long> area_d(1, static_cast<long long>(w) * h);
        kg.nodes.push_back(node(i, cls, ++per_class[static_cast<int>(cls)], area_d(rng),
                                {x0, y0, x0 + w - 1, y0 + h - 1}));
    }
    for (int u = 0; u < n; ++u)
        for (int v = u + 1; v < n; ++v)
            if (edge_d(rng)) kg.edges.insert({u, v});
    return kg;
}

}  // namespace fixtures
