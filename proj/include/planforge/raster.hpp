#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "planforge/error.hpp"
#include "planforge/grid.hpp"

namespace planforge {

// The merged 11-value palette. The first six values are room classes and the
// only labels that become graph nodes.
enum class Label : std::uint8_t {
    living,
    bedroom,
    kitchen,
    bathroom,
    balcony,
    storage,
    external_area,
    exterior_wall,
    front_door,
    interior_wall,
    interior_door,
};

inline constexpr int kLabelCount = 11;
inline constexpr int kRoomClassCount = 6;

inline constexpr std::array<Label, kLabelCount> kAllLabels = {
    Label::living,        Label::bedroom,       Label::kitchen,    Label::bathroom,
    Label::balcony,       Label::storage,       Label::external_area,
    Label::exterior_wall, Label::front_door,    Label::interior_wall,
    Label::interior_door,
};

inline constexpr std::array<Label, kRoomClassCount> kRoomClasses = {
    Label::living, Label::bedroom, Label::kitchen,
    Label::bathroom, Label::balcony, Label::storage,
};

constexpr bool is_room(Label l) noexcept {
    return static_cast<int>(l) < kRoomClassCount;
}

constexpr std::string_view label_name(Label l) noexcept {
    constexpr std::array<std::string_view, kLabelCount> names = {
        "living",        "bedroom",    "kitchen",       "bathroom",
        "balcony",       "storage",    "external_area", "exterior_wall",
        "front_door",    "interior_wall", "interior_door",
    };
    return names[static_cast<std::size_t>(l)];
}

inline std::optional<Label> label_from_name(std::string_view name) noexcept {
    for (Label l : kAllLabels)
        if (label_name(l) == name) return l;
    return std::nullopt;
}

struct Rgba {
    std::uint8_t r = 0, g = 0, b = 0, a = 0;
    friend constexpr bool operator==(const Rgba&, const Rgba&) = default;
};

// Label colors and the raw channel-2 value domain of the merged palette.
namespace palette {

constexpr Rgba color(Label l) noexcept {
    switch (l) {
        case Label::living:        return {244, 242, 229, 255};
        case Label::bedroom:       return {253, 244, 171, 255};
        case Label::kitchen:       return {234, 216, 214, 255};
        case Label::bathroom:      return {205, 233, 252, 255};
        case Label::balcony:       return {208, 216, 135, 255};
        case Label::storage:       return {249, 222, 189, 255};
        case Label::external_area: return {0, 0, 0, 255};
        case Label::exterior_wall: return {79, 79, 79, 255};
        case Label::front_door:    return {255, 225, 25, 255};
        case Label::interior_wall: return {128, 128, 128, 255};
        case Label::interior_door: return {255, 255, 255, 255};
    }
    return {};
}

inline constexpr int kChannel2Domain = 18;  // values 0..17

constexpr std::optional<Label> from_channel2(int value) noexcept {
    switch (value) {
        case 0: case 4: case 10:               return Label::living;
        case 1: case 5: case 6: case 7: case 8: return Label::bedroom;
        case 2:                                return Label::kitchen;
        case 3: case 12:                       return Label::bathroom;
        case 9:                                return Label::balcony;
        case 11:                               return Label::storage;
        case 13:                               return Label::external_area;
        case 14:                               return Label::exterior_wall;
        case 15:                               return Label::front_door;
        case 16:                               return Label::interior_wall;
        case 17:                               return Label::interior_door;
        default:                               return std::nullopt;
    }
}

// Smallest channel-2 value of a label; used when synthesizing plans.
constexpr int canonical_channel2(Label l) noexcept {
    switch (l) {
        case Label::living:        return 0;
        case Label::bedroom:       return 1;
        case Label::kitchen:       return 2;
        case Label::bathroom:      return 3;
        case Label::balcony:       return 9;
        case Label::storage:       return 11;
        case Label::external_area: return 13;
        case Label::exterior_wall: return 14;
        case Label::front_door:    return 15;
        case Label::interior_wall: return 16;
        case Label::interior_door: return 17;
    }
    return 13;
}

inline std::optional<Label> from_color(Rgba c) noexcept {
    for (Label l : kAllLabels)
        if (color(l) == c) return l;
    return std::nullopt;
}

}  // namespace palette

// Source channels in RPLAN order: 0 = exterior walls / front door,
// 1 = space type (channel 2), 2 = repetition index, 3 = interior mask.
enum class Channel : int { boundary = 0, space_type = 1, repetition = 2, alpha = 3 };

struct RasterPlan {
    Grid<Label> labels;
    std::array<Grid<std::uint8_t>, 4> channels;

    int width() const noexcept { return labels.width(); }
    int height() const noexcept { return labels.height(); }

    const Grid<std::uint8_t>& channel(Channel c) const noexcept {
        return channels[static_cast<std::size_t>(c)];
    }
    bool interior(int x, int y) const noexcept {
        return channel(Channel::alpha)(x, y) != 0;
    }
    std::size_t interior_pixel_count() const noexcept {
        std::size_t n = 0;
        for (auto a : channel(Channel::alpha)) n += a != 0;
        return n;
    }

    friend bool operator==(const RasterPlan&, const RasterPlan&) = default;
};

// Builds a plan from four separate channel grids. Pixels outside the interior
// mask (alpha 0) are external_area whatever channel 2 says; inside the mask an
// unknown channel-2 value is a data error.
inline RasterPlan decode_channels(std::array<Grid<std::uint8_t>, 4> channels) {
    const int w = channels[0].width();
    const int h = channels[0].height();
    for (const auto& c : channels)
        if (c.width() != w || c.height() != h)
            throw Error("DimensionMismatch", "channel grids differ in size");

    RasterPlan plan;
    plan.labels = Grid<Label>(w, h, Label::external_area);
    const auto& space = channels[static_cast<int>(Channel::space_type)];
    const auto& alpha = channels[static_cast<int>(Channel::alpha)];
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (alpha(x, y) == 0) continue;
            const int v = space(x, y);
            auto l = palette::from_channel2(v);
            if (!l)
                throw Error("UnknownChannel2Value",
                            "unknown channel-2 value " + std::to_string(v) + " at (" +
                                std::to_string(x) + ", " + std::to_string(y) + ")");
            plan.labels(x, y) = *l;
        }
    }
    plan.channels = std::move(channels);
    return plan;
}

inline RasterPlan decode_plan(const Image8& image) {
    if (image.channels != 4)
        throw Error("ChannelCountMismatch",
                    "expected 4 channels, got " + std::to_string(image.channels));
    if (image.width < 0 || image.height < 0 ||
        image.data.size() != static_cast<std::size_t>(image.width) *
                                 static_cast<std::size_t>(image.height) * 4u)
        throw Error("DimensionMismatch", "pixel buffer does not match image dimensions");

    std::array<Grid<std::uint8_t>, 4> channels;
    for (int c = 0; c < 4; ++c) channels[c] = Grid<std::uint8_t>(image.width, image.height);
    for (int y = 0; y < image.height; ++y)
        for (int x = 0; x < image.width; ++x)
            for (int c = 0; c < 4; ++c) channels[c](x, y) = image.at(x, y, c);
    return decode_channels(std::move(channels));
}

// Synthesizes RPLAN-style channels for a label grid: channel 1 is 127 on
// exterior walls and 255 on front doors, channel 2 takes each label's smallest
// value, channel 3 is zero and alpha is 0 exactly on external_area.
inline RasterPlan encode_plan(const Grid<Label>& labels) {
    RasterPlan plan;
    plan.labels = labels;
    for (auto& c : plan.channels) c = Grid<std::uint8_t>(labels.width(), labels.height());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const Label l = labels[i];
        plan.channels[0][i] = l == Label::exterior_wall ? 127 : l == Label::front_door ? 255 : 0;
        plan.channels[1][i] = static_cast<std::uint8_t>(palette::canonical_channel2(l));
        plan.channels[2][i] = 0;
        plan.channels[3][i] = l == Label::external_area ? 0 : 255;
    }
    return plan;
}

inline Image8 to_image(const RasterPlan& plan) {
    Image8 img(plan.width(), plan.height(), 4);
    for (int y = 0; y < plan.height(); ++y)
        for (int x = 0; x < plan.width(); ++x)
            for (int c = 0; c < 4; ++c) img.at(x, y, c) = plan.channels[c](x, y);
    return img;
}

inline Image8 recolor(const RasterPlan& plan) {
    Image8 img(plan.width(), plan.height(), 4);
    for (int y = 0; y < plan.height(); ++y) {
        for (int x = 0; x < plan.width(); ++x) {
            const Rgba c = palette::color(plan.labels(x, y));
            img.at(x, y, 0) = c.r;
            img.at(x, y, 1) = c.g;
            img.at(x, y, 2) = c.b;
            img.at(x, y, 3) = c.a;
        }
    }
    return img;
}

// Inverse of recolor.
inline Grid<Label> decode_colors(const Image8& image) {
    if (image.channels != 4)
        throw Error("ChannelCountMismatch",
                    "expected 4 channels, got " + std::to_string(image.channels));
    Grid<Label> labels(image.width, image.height);
    for (int y = 0; y < image.height; ++y) {
        for (int x = 0; x < image.width; ++x) {
            const Rgba c{image.at(x, y, 0), image.at(x, y, 1), image.at(x, y, 2),
                         image.at(x, y, 3)};
            auto l = palette::from_color(c);
            if (!l)
                throw Error("UnknownColor", "color outside the palette at (" +
                                                std::to_string(x) + ", " +
                                                std::to_string(y) + ")");
            labels(x, y) = *l;
        }
    }
    return labels;
}

// Nearest-neighbor block replication; keeps the label set exact.
template <class T>
Grid<T> replicate(const Grid<T>& src, int factor) {
    Grid<T> out(src.width() * factor, src.height() * factor);
    for (int y = 0; y < out.height(); ++y)
        for (int x = 0; x < out.width(); ++x) out(x, y) = src(x / factor, y / factor);
    return out;
}

inline RasterPlan upsample(const RasterPlan& plan, int factor = 2) {
    if (factor < 1)
        throw Error("ZeroFactor", "upsample factor must be >= 1, got " + std::to_string(factor));
    RasterPlan out;
    out.labels = replicate(plan.labels, factor);
    for (int c = 0; c < 4; ++c) out.channels[c] = replicate(plan.channels[c], factor);
    return out;
}

}  // namespace planforge
