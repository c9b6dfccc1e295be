#pragma once

#include <initializer_list>
#include <string>
#include <string_view>

#include <json.hpp>

#include "planforge/error.hpp"

namespace planforge::jsonutil {

using Json = nlohmann::ordered_json;

// Parses a document, reporting syntax errors as ParseError with line/column.
inline Json parse(std::string_view text) {
    try {
        return Json::parse(text.begin(), text.end());
    } catch (const nlohmann::json::parse_error& e) {
        std::size_t pos = e.byte > 0 ? e.byte - 1 : 0;
        if (pos > text.size()) pos = text.size();
        std::size_t line = 1, col = 1;
        for (std::size_t i = 0; i < pos; ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ParseError(pos, "well-formed JSON", line, col);
    }
}

[[noreturn]] inline void schema_error(const std::string& where, const std::string& what) {
    throw Error("SchemaError", where + ": " + what);
}

inline const Json& require_object(const Json& j, const std::string& where) {
    if (!j.is_object()) schema_error(where, "expected an object");
    return j;
}

inline const Json& require_array(const Json& j, const std::string& where) {
    if (!j.is_array()) schema_error(where, "expected an array");
    return j;
}

// Rejects any key outside `allowed`.
inline void only_fields(const Json& obj, std::initializer_list<std::string_view> allowed,
                        const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (auto a : allowed) ok = ok || it.key() == a;
        if (!ok) schema_error(where, "unknown field \"" + it.key() + "\"");
    }
}

inline const Json& field(const Json& obj, const char* key, const std::string& where) {
    auto it = obj.find(key);
    if (it == obj.end()) schema_error(where, std::string("missing field \"") + key + "\"");
    return *it;
}

inline long long as_int(const Json& j, const std::string& where) {
    if (!j.is_number_integer()) schema_error(where, "expected an integer");
    return j.get<long long>();
}

inline double as_number(const Json& j, const std::string& where) {
    if (!j.is_number()) schema_error(where, "expected a number");
    return j.get<double>();
}

inline const std::string& as_string(const Json& j, const std::string& where) {
    if (!j.is_string()) schema_error(where, "expected a string");
    return j.get_ref<const std::string&>();
}

}  // namespace planforge::jsonutil
