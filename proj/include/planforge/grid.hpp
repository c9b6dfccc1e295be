#pragma once

#include <cassert>
#include <cstddef>
#include <vector>

namespace planforge {

// Dense row-major 2-D array; (x, y) with x along the width.
template <class T>
class Grid {
public:
    Grid() = default;
    Grid(int width, int height, T fill = T{})
        : width_(width), height_(height),
          cells_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill) {}

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t size() const noexcept { return cells_.size(); }
    bool empty() const noexcept { return cells_.empty(); }

    bool contains(int x, int y) const noexcept {
        return x >= 0 && y >= 0 && x < width_ && y < height_;
    }
    std::size_t index(int x, int y) const noexcept {
        assert(contains(x, y));
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
               static_cast<std::size_t>(x);
    }

    T& operator()(int x, int y) noexcept { return cells_[index(x, y)]; }
    const T& operator()(int x, int y) const noexcept { return cells_[index(x, y)]; }

    T& operator[](std::size_t i) noexcept { return cells_[i]; }
    const T& operator[](std::size_t i) const noexcept { return cells_[i]; }

    std::vector<T>& data() noexcept { return cells_; }
    const std::vector<T>& data() const noexcept { return cells_; }

    auto begin() noexcept { return cells_.begin(); }
    auto end() noexcept { return cells_.end(); }
    auto begin() const noexcept { return cells_.begin(); }
    auto end() const noexcept { return cells_.end(); }

    bool same_shape(const Grid& other) const noexcept {
        return width_ == other.width_ && height_ == other.height_;
    }

    friend bool operator==(const Grid&, const Grid&) = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<T> cells_;
};

// Interleaved 8-bit image, `channels` samples per pixel.
struct Image8 {
    int width = 0;
    int height = 0;
    int channels = 0;
    std::vector<unsigned char> data;

    Image8() = default;
    Image8(int w, int h, int c)
        : width(w), height(h), channels(c),
          data(static_cast<std::size_t>(w) * static_cast<std::size_t>(h) *
               static_cast<std::size_t>(c)) {}

    unsigned char& at(int x, int y, int c) {
        return data[(static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
                     static_cast<std::size_t>(x)) * static_cast<std::size_t>(channels) +
                    static_cast<std::size_t>(c)];
    }
    unsigned char at(int x, int y, int c) const {
        return data[(static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
                     static_cast<std::size_t>(x)) * static_cast<std::size_t>(channels) +
                    static_cast<std::size_t>(c)];
    }

    friend bool operator==(const Image8&, const Image8&) = default;
};

}  // namespace planforge
