#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "planforge/compliance.hpp"
#include "planforge/json_util.hpp"
#include "planforge/prompt.hpp"

namespace planforge {

// Constraint document:
//   {"counts": {"bedroom": 2, ...} | null,
//    "areas": [{"ref": "bedroom_1", "area": 17}, ...] | null,
//    "connections": [["bedroom_1", "bathroom"], ...] | null,
//    "warnings": [{"code": ..., "message": ...}, ...]}
// Refs use the connection spelling. "warnings" is written for readers and
// ignored when loading.
inline jsonutil::Json constraints_to_json(const ConstraintSet& cs,
                                          const std::vector<ConsistencyWarning>& warnings = {}) {
    using jsonutil::Json;
    Json doc = Json::object();
    if (cs.counts) {
        Json counts = Json::object();
        for (const auto& [c, k] : *cs.counts) counts[class_token(c)] = k;
        doc["counts"] = std::move(counts);
    } else {
        doc["counts"] = nullptr;
    }
    if (cs.areas) {
        Json areas = Json::array();
        for (const auto& a : *cs.areas) areas.push_back({{"ref", ref_token(a.ref)}, {"area", a.area}});
        doc["areas"] = std::move(areas);
    } else {
        doc["areas"] = nullptr;
    }
    if (cs.connections) {
        Json conns = Json::array();
        for (const auto& c : *cs.connections)
            conns.push_back(Json::array({ref_token(c.a), ref_token(c.b)}));
        doc["connections"] = std::move(conns);
    } else {
        doc["connections"] = nullptr;
    }
    Json warns = Json::array();
    for (const auto& w : warnings) warns.push_back({{"code", w.code()}, {"message", w.message()}});
    doc["warnings"] = std::move(warns);
    return doc;
}

inline std::string serialize_constraints(const ConstraintSet& cs,
                                         const std::vector<ConsistencyWarning>& warnings = {}) {
    return constraints_to_json(cs, warnings).dump(2) + "\n";
}

inline RoomRef parse_ref_token(const std::string& token, const std::string& where) {
    detail::Compact c;
    for (std::size_t i = 0; i < token.size(); ++i) {
        c.text.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(token[i]))));
        c.origin.push_back(i);
    }
    c.end = token.size();
    try {
        return detail::parse_ref(c, 0, c.text.size());
    } catch (const ParseError&) {
        jsonutil::schema_error(where, "not a room reference: \"" + token + "\"");
    }
}

inline ConstraintSet constraints_from_json(const jsonutil::Json& doc) {
    using namespace jsonutil;
    require_object(doc, "constraints");
    only_fields(doc, {"counts", "areas", "connections", "warnings"}, "constraints");
    ConstraintSet cs;
    if (auto it = doc.find("counts"); it != doc.end() && !it->is_null()) {
        require_object(*it, "counts");
        cs.counts.emplace();
        for (auto c = it->begin(); c != it->end(); ++c) {
            RoomRef r = parse_ref_token(c.key(), "counts");
            if (r.index) schema_error("counts", "count keys are room classes: " + c.key());
            const long long k = as_int(c.value(), "counts." + c.key());
            if (k < 0) schema_error("counts." + c.key(), "negative count");
            (*cs.counts)[r.room_class] = static_cast<int>(k);
        }
    }
    if (auto it = doc.find("areas"); it != doc.end() && !it->is_null()) {
        require_array(*it, "areas");
        cs.areas.emplace();
        for (std::size_t i = 0; i < it->size(); ++i) {
            const std::string where = "areas[" + std::to_string(i) + "]";
            const Json& a = require_object((*it)[i], where);
            only_fields(a, {"ref", "area"}, where);
            RoomRef r = parse_ref_token(as_string(field(a, "ref", where), where), where);
            const long long area = as_int(field(a, "area", where), where + ".area");
            if (area < 1) schema_error(where + ".area", "area must be positive");
            cs.areas->push_back({r, area});
        }
    }
    if (auto it = doc.find("connections"); it != doc.end() && !it->is_null()) {
        require_array(*it, "connections");
        cs.connections.emplace();
        for (std::size_t i = 0; i < it->size(); ++i) {
            const std::string where = "connections[" + std::to_string(i) + "]";
            const Json& pair = require_array((*it)[i], where);
            if (pair.size() != 2) schema_error(where, "expected two refs");
            cs.connections->push_back({parse_ref_token(as_string(pair[0], where), where),
                                       parse_ref_token(as_string(pair[1], where), where)});
        }
    }
    return cs;
}

inline ConstraintSet deserialize_constraints(std::string_view text) {
    return constraints_from_json(jsonutil::parse(text));
}

// Report document:
//   {"rules": [{"rule": "a", "name": "counts", "status": "pass", "details": ...}, ...],
//    "violations": [{"rule": "a", "message": ..., "refs": [...]}, ...],
//    "all_applicable_pass": true}
inline jsonutil::Json report_to_json(const ComplianceReport& rep) {
    using jsonutil::Json;
    Json doc = Json::object();
    Json rules = Json::array();
    for (const auto& r : rep.rules)
        rules.push_back({{"rule", std::string(1, rule_letter(r.rule))},
                         {"name", rule_name(r.rule)},
                         {"status", status_name(r.status)},
                         {"details", r.details}});
    doc["rules"] = std::move(rules);
    Json viol = Json::array();
    for (const auto& v : rep.violations)
        viol.push_back({{"rule", std::string(1, rule_letter(v.rule))},
                        {"message", v.message},
                        {"refs", v.refs}});
    doc["violations"] = std::move(viol);
    doc["all_applicable_pass"] = rep.all_applicable_pass();
    return doc;
}

inline std::string serialize_report(const ComplianceReport& rep) {
    return report_to_json(rep).dump(2) + "\n";
}

}  // namespace planforge
