#pragma once

// Pipeline configuration and its "key = value" text form.
//
//   # comment
//   area_divisor = 100
//   canny.sigma = 1.0
//   difflab.schedule = linear:0.001:0.05
//
// Blank lines and '#' comments are ignored; unknown keys are errors. Every key
// is listed, with its default, by `planforge --show-config`.

#include <charconv>
#include <filesystem>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "planforge/boundary.hpp"
#include "planforge/compliance.hpp"
#include "planforge/difflab/train.hpp"
#include "planforge/feature_io.hpp"
#include "planforge/metrics.hpp"

namespace planforge {

struct PipelineConfig {
    // Area tokens are round(pixel_area / divisor) at base_resolution; graphs of
    // other widths scale the divisor by (width / base_resolution)^2.
    double area_divisor = 100.0;
    int base_resolution = 256;
    int upsample_factor = 2;
    int dilation = 1;

    CannyParams canny;

    metrics::SsimMode ssim_mode = metrics::SsimMode::windowed;
    bool lpips_normalize = false;
    double max_value = 255.0;

    double area_tolerance = 0.15;
    std::vector<AdjacencyNorm> norms{{Label::living, Label::kitchen}};
    std::optional<double> min_compactness;
    std::optional<int> max_path_length;

    difflab::TrainConfig difflab;
    int embed_dim = 64;
    int sample_count = 1000;
};

namespace config_detail {

inline Error invalid(const std::string& key, const std::string& value, const std::string& want) {
    return Error("InvalidConfig", key + " = '" + value + "': expected " + want);
}

inline std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline double to_double(const std::string& key, const std::string& v) {
    double d = 0.0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), d);
    if (ec != std::errc() || p != v.data() + v.size() || !std::isfinite(d)) throw invalid(key, v, "a number");
    return d;
}

inline long long to_int(const std::string& key, const std::string& v) {
    long long i = 0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), i);
    if (ec != std::errc() || p != v.data() + v.size()) throw invalid(key, v, "an integer");
    return i;
}

inline bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "on") return true;
    if (v == "false" || v == "0" || v == "off") return false;
    throw invalid(key, v, "true or false");
}

inline std::string fmt(double v) {
    char buf[64];
    const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, p);
}

inline std::string fmt(bool v) { return v ? "true" : "false"; }

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string part;
    std::istringstream in(s);
    while (std::getline(in, part, sep)) parts.push_back(trim(part));
    return parts;
}

inline Label room_label(const std::string& key, const std::string& v, const std::string& name) {
    const auto l = label_from_name(name);
    if (!l || !is_room(*l)) throw invalid(key, v, "room classes such as living-kitchen");
    return *l;
}

struct Key {
    std::string name;
    std::function<std::string(const PipelineConfig&)> get;
    std::function<void(PipelineConfig&, const std::string&)> set;
};

template <typename T>
Key number(std::string name, T PipelineConfig::*field) {
    return {name, [field](const PipelineConfig& c) { return fmt(static_cast<double>(c.*field)); },
            [field, name](PipelineConfig& c, const std::string& v) {
                if constexpr (std::is_integral_v<T>)
                    c.*field = static_cast<T>(to_int(name, v));
                else
                    c.*field = to_double(name, v);
            }};
}

template <typename T>
Key train_number(std::string name, T difflab::TrainConfig::*field) {
    return {name, [field](const PipelineConfig& c) { return fmt(static_cast<double>(c.difflab.*field)); },
            [field, name](PipelineConfig& c, const std::string& v) {
                if constexpr (std::is_integral_v<T>)
                    c.difflab.*field = static_cast<T>(to_int(name, v));
                else
                    c.difflab.*field = to_double(name, v);
            }};
}

inline Key train_flag(std::string name, bool difflab::TrainConfig::*field) {
    return {name, [field](const PipelineConfig& c) { return fmt(c.difflab.*field); },
            [field, name](PipelineConfig& c, const std::string& v) { c.difflab.*field = to_bool(name, v); }};
}

inline const std::vector<Key>& keys() {
    static const std::vector<Key> table = [] {
        std::vector<Key> k;
        k.push_back(number("area_divisor", &PipelineConfig::area_divisor));
        k.push_back(number("base_resolution", &PipelineConfig::base_resolution));
        k.push_back(number("upsample_factor", &PipelineConfig::upsample_factor));
        k.push_back(number("dilation", &PipelineConfig::dilation));
        k.push_back({"canny.sigma", [](const PipelineConfig& c) { return fmt(c.canny.sigma); },
                     [](PipelineConfig& c, const std::string& v) { c.canny.sigma = to_double("canny.sigma", v); }});
        k.push_back({"canny.low", [](const PipelineConfig& c) { return fmt(c.canny.low); },
                     [](PipelineConfig& c, const std::string& v) { c.canny.low = to_double("canny.low", v); }});
        k.push_back({"canny.high", [](const PipelineConfig& c) { return fmt(c.canny.high); },
                     [](PipelineConfig& c, const std::string& v) { c.canny.high = to_double("canny.high", v); }});
        k.push_back({"ssim.mode",
                     [](const PipelineConfig& c) {
                         return std::string(c.ssim_mode == metrics::SsimMode::windowed ? "windowed" : "global");
                     },
                     [](PipelineConfig& c, const std::string& v) {
                         if (v == "windowed")
                             c.ssim_mode = metrics::SsimMode::windowed;
                         else if (v == "global")
                             c.ssim_mode = metrics::SsimMode::global;
                         else
                             throw invalid("ssim.mode", v, "windowed or global");
                     }});
        k.push_back({"lpips.normalize", [](const PipelineConfig& c) { return fmt(c.lpips_normalize); },
                     [](PipelineConfig& c, const std::string& v) {
                         c.lpips_normalize = to_bool("lpips.normalize", v);
                     }});
        k.push_back(number("max_value", &PipelineConfig::max_value));
        k.push_back(number("compliance.area_tolerance", &PipelineConfig::area_tolerance));
        k.push_back({"compliance.norms",
                     [](const PipelineConfig& c) {
                         if (c.norms.empty()) return std::string("none");
                         std::string s;
                         for (const auto& n : c.norms)
                             s += (s.empty() ? "" : ",") + std::string(label_name(n.a)) + "-" +
                                  std::string(label_name(n.b));
                         return s;
                     },
                     [](PipelineConfig& c, const std::string& v) {
                         c.norms.clear();
                         if (v == "none") return;
                         for (const auto& pair : split(v, ',')) {
                             const auto dash = pair.find('-');
                             if (dash == std::string::npos) throw invalid("compliance.norms", v, "pairs like a-b");
                             c.norms.push_back({room_label("compliance.norms", v, pair.substr(0, dash)),
                                                room_label("compliance.norms", v, pair.substr(dash + 1))});
                         }
                     }});
        k.push_back({"compliance.min_compactness",
                     [](const PipelineConfig& c) { return c.min_compactness ? fmt(*c.min_compactness) : "none"; },
                     [](PipelineConfig& c, const std::string& v) {
                         c.min_compactness.reset();
                         if (v != "none") c.min_compactness = to_double("compliance.min_compactness", v);
                     }});
        k.push_back({"compliance.max_path_length",
                     [](const PipelineConfig& c) {
                         return c.max_path_length ? std::to_string(*c.max_path_length) : std::string("none");
                     },
                     [](PipelineConfig& c, const std::string& v) {
                         c.max_path_length.reset();
                         if (v != "none")
                             c.max_path_length = static_cast<int>(to_int("compliance.max_path_length", v));
                     }});
        k.push_back(train_number("difflab.T", &difflab::TrainConfig::T));
        k.push_back({"difflab.schedule",
                     [](const PipelineConfig& c) {
                         if (const auto* lin = std::get_if<difflab::LinearBeta>(&c.difflab.schedule))
                             return "linear:" + fmt(lin->beta_start) + ":" + fmt(lin->beta_end);
                         return "constant:" + fmt(std::get<difflab::ConstantAlpha>(c.difflab.schedule).alpha);
                     },
                     [](PipelineConfig& c, const std::string& v) {
                         const auto parts = split(v, ':');
                         const std::string key = "difflab.schedule";
                         if (parts.size() == 3 && parts[0] == "linear")
                             c.difflab.schedule =
                                 difflab::LinearBeta{to_double(key, parts[1]), to_double(key, parts[2])};
                         else if (parts.size() == 2 && parts[0] == "constant")
                             c.difflab.schedule = difflab::ConstantAlpha{to_double(key, parts[1])};
                         else
                             throw invalid(key, v, "linear:<beta_1>:<beta_T> or constant:<alpha>");
                     }});
        k.push_back({"difflab.lambda1", [](const PipelineConfig& c) { return fmt(c.difflab.loss.lambda1); },
                     [](PipelineConfig& c, const std::string& v) {
                         c.difflab.loss.lambda1 = to_double("difflab.lambda1", v);
                     }});
        k.push_back({"difflab.lambda2", [](const PipelineConfig& c) { return fmt(c.difflab.loss.lambda2); },
                     [](PipelineConfig& c, const std::string& v) {
                         c.difflab.loss.lambda2 = to_double("difflab.lambda2", v);
                     }});
        k.push_back(train_number("difflab.learning_rate", &difflab::TrainConfig::learning_rate));
        k.push_back(train_number("difflab.steps", &difflab::TrainConfig::steps));
        k.push_back(train_number("difflab.batch", &difflab::TrainConfig::batch));
        k.push_back({"difflab.seed", [](const PipelineConfig& c) { return std::to_string(c.difflab.seed); },
                     [](PipelineConfig& c, const std::string& v) {
                         const long long s = to_int("difflab.seed", v);
                         if (s < 0) throw invalid("difflab.seed", v, "a non-negative integer");
                         c.difflab.seed = static_cast<std::uint64_t>(s);
                     }});
        k.push_back(train_number("difflab.hidden", &difflab::TrainConfig::hidden));
        k.push_back(train_number("difflab.depth", &difflab::TrainConfig::depth));
        k.push_back(train_number("difflab.time_dim", &difflab::TrainConfig::time_dim));
        k.push_back(train_flag("difflab.lora", &difflab::TrainConfig::lora));
        k.push_back(train_number("difflab.lora_rank", &difflab::TrainConfig::lora_rank));
        k.push_back(train_number("difflab.lora_scale", &difflab::TrainConfig::lora_scale));
        k.push_back(train_flag("difflab.control", &difflab::TrainConfig::control));
        k.push_back(train_number("difflab.control_alpha", &difflab::TrainConfig::control_alpha));
        k.push_back(number("difflab.embed_dim", &PipelineConfig::embed_dim));
        k.push_back(number("difflab.sample_count", &PipelineConfig::sample_count));
        return k;
    }();
    return table;
}

}  // namespace config_detail

inline void set_config_value(PipelineConfig& cfg, const std::string& key, const std::string& value) {
    for (const auto& k : config_detail::keys())
        if (k.name == key) return k.set(cfg, config_detail::trim(value));
    throw Error("InvalidConfig", "unknown config key '" + key + "'");
}

// Range checks that do not need input data.
inline void validate(const PipelineConfig& c) {
    auto fail = [](const std::string& what) { throw Error("InvalidConfig", what); };
    if (!(c.area_divisor > 0.0)) fail("area_divisor must be > 0");
    if (c.base_resolution < 1) fail("base_resolution must be >= 1");
    if (c.upsample_factor < 1) fail("upsample_factor must be >= 1");
    if (c.dilation < 0) fail("dilation must be >= 0");
    if (!(c.canny.sigma > 0.0)) fail("canny.sigma must be > 0");
    if (!(c.canny.low >= 0.0 && c.canny.low <= c.canny.high && c.canny.high <= 1.0))
        fail("need 0 <= canny.low <= canny.high <= 1");
    if (!(c.max_value > 0.0)) fail("max_value must be > 0");
    if (!(c.area_tolerance >= 0.0)) fail("compliance.area_tolerance must be >= 0");
    if (c.max_path_length && *c.max_path_length < 0) fail("compliance.max_path_length must be >= 0");
    if (c.embed_dim < 1) fail("difflab.embed_dim must be >= 1");
    if (c.sample_count < 1) fail("difflab.sample_count must be >= 1");
    try {
        difflab::make_schedule(c.difflab.T, c.difflab.schedule);
        difflab::detail::check_config(c.difflab);
    } catch (const Error& e) {
        fail(std::string("difflab: ") + e.what());
    }
}

inline void parse_config(PipelineConfig& cfg, const std::string& text, const std::string& source = "config") {
    std::istringstream in(text);
    std::string line;
    for (int n = 1; std::getline(in, line); ++n) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = config_detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw Error("InvalidConfig", source + ":" + std::to_string(n) + ": expected key = value");
        try {
            set_config_value(cfg, config_detail::trim(line.substr(0, eq)), line.substr(eq + 1));
        } catch (const Error& e) {
            throw Error("InvalidConfig", source + ":" + std::to_string(n) + ": " + e.what());
        }
    }
}

inline PipelineConfig load_config(const std::filesystem::path& path, PipelineConfig base = {}) {
    parse_config(base, features::detail::slurp(path), path.string());
    return base;
}

inline std::string format_config(const PipelineConfig& cfg) {
    std::string out;
    for (const auto& k : config_detail::keys()) out += k.name + " = " + k.get(cfg) + "\n";
    return out;
}

// Divisor for a graph extracted at `image_width` pixels.
inline double effective_area_divisor(const PipelineConfig& cfg, int image_width) {
    const double s = static_cast<double>(image_width) / cfg.base_resolution;
    return cfg.area_divisor * s * s;
}

inline ComplianceOptions compliance_options(const PipelineConfig& cfg, int image_width) {
    ComplianceOptions o;
    o.area_divisor = effective_area_divisor(cfg, image_width);
    o.area_rel_tolerance = cfg.area_tolerance;
    o.norms = cfg.norms;
    o.min_compactness = cfg.min_compactness;
    o.max_path_length = cfg.max_path_length;
    return o;
}

}  // namespace planforge
