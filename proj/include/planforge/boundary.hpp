#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "planforge/error.hpp"
#include "planforge/grid.hpp"
#include "planforge/raster.hpp"

namespace planforge {

// Intensities in [0, 1].
using GrayImage = Grid<double>;

// 1 marks an edge pixel.
using EdgeMap = Grid<std::uint8_t>;

// Exterior walls and front doors at 1, everything else at 0.
inline GrayImage boundary_image(const RasterPlan& plan) {
    GrayImage img(plan.width(), plan.height(), 0.0);
    for (std::size_t i = 0; i < img.size(); ++i) {
        const Label l = plan.labels[i];
        if (l == Label::exterior_wall || l == Label::front_door) img[i] = 1.0;
    }
    return img;
}

// Rec. 601 luma of an 8-bit RGB(A) or gray image, scaled to [0, 1].
inline GrayImage luminance(const Image8& img) {
    if (img.channels < 1 || img.channels > 4)
        throw Error("ChannelCountMismatch", "unsupported channel count " + std::to_string(img.channels));
    GrayImage out(img.width, img.height);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            double v;
            if (img.channels >= 3)
                v = 0.299 * img.at(x, y, 0) + 0.587 * img.at(x, y, 1) + 0.114 * img.at(x, y, 2);
            else
                v = img.at(x, y, 0);
            out(x, y) = std::clamp(v / 255.0, 0.0, 1.0);
        }
    }
    return out;
}

inline Image8 edge_png(const EdgeMap& edges) {
    Image8 img(edges.width(), edges.height(), 1);
    for (std::size_t i = 0; i < edges.size(); ++i) img.data[i] = edges[i] ? 255 : 0;
    return img;
}

struct CannyParams {
    double sigma = 1.0;
    double low = 0.1;
    double high = 0.2;
};

namespace detail {

inline int clamp_coord(int v, int n) { return std::clamp(v, 0, n - 1); }

// Separable Gaussian truncated at 3 sigma, replicate padding.
inline GrayImage gaussian_blur(const GrayImage& src, double sigma) {
    const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
    std::vector<double> k(2 * radius + 1);
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        k[i + radius] = std::exp(-(i * i) / (2.0 * sigma * sigma));
        sum += k[i + radius];
    }
    for (double& v : k) v /= sum;

    const int w = src.width(), h = src.height();
    GrayImage tmp(w, h), out(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i) acc += k[i + radius] * src(clamp_coord(x + i, w), y);
            tmp(x, y) = acc;
        }
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i) acc += k[i + radius] * tmp(x, clamp_coord(y + i, h));
            out(x, y) = acc;
        }
    return out;
}

}  // namespace detail

// Gaussian blur, Sobel gradients, non-maximum suppression along the gradient
// direction quantized to 4 axes, then double-threshold hysteresis on the
// gradient magnitude normalized by its maximum. Weak pixels survive only when
// 8-connected to a strong one.
//
// On a plateau of equal magnitudes the pixel kept is the one on the darker
// side of the edge (as OpenCV does), so results are equivariant under
// 90-degree rotation.
inline EdgeMap canny(const GrayImage& img, const CannyParams& p = {}) {
    if (!(p.sigma > 0.0)) throw Error("InvalidParameter", "sigma must be > 0");
    if (!(p.low >= 0.0 && p.high <= 1.0 && p.low <= p.high))
        throw Error("InvalidThresholds", "need 0 <= low <= high <= 1");

    const int w = img.width(), h = img.height();
    EdgeMap edges(w, h, 0);
    if (w == 0 || h == 0) return edges;

    const GrayImage blurred = detail::gaussian_blur(img, p.sigma);
    auto at = [&](int x, int y) {
        return blurred(detail::clamp_coord(x, w), detail::clamp_coord(y, h));
    };

    GrayImage gx(w, h), gy(w, h), mag(w, h);
    double peak = 0.0;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const double dx = (at(x + 1, y - 1) + 2 * at(x + 1, y) + at(x + 1, y + 1)) -
                              (at(x - 1, y - 1) + 2 * at(x - 1, y) + at(x - 1, y + 1));
            const double dy = (at(x - 1, y + 1) + 2 * at(x, y + 1) + at(x + 1, y + 1)) -
                              (at(x - 1, y - 1) + 2 * at(x, y - 1) + at(x + 1, y - 1));
            gx(x, y) = dx;
            gy(x, y) = dy;
            mag(x, y) = std::hypot(dx, dy);
            peak = std::max(peak, mag(x, y));
        }
    if (peak <= 1e-12) return edges;
    for (double& m : mag) m /= peak;

    // Magnitudes closer than this compare equal in the suppression step.
    constexpr double tie = 1e-9;
    GrayImage thin(w, h, 0.0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const double m = mag(x, y);
            if (m <= 0.0) continue;
            const double dx = gx(x, y), dy = gy(x, y);
            // Step towards increasing intensity, snapped to one of 8 neighbors.
            const double angle = std::atan2(dy, dx);
            const int octant = static_cast<int>(std::lround(angle / (M_PI / 4.0))) & 7;
            static constexpr int step_x[8] = {1, 1, 0, -1, -1, -1, 0, 1};
            static constexpr int step_y[8] = {0, 1, 1, 1, 0, -1, -1, -1};
            const int sx = step_x[octant], sy = step_y[octant];
            auto neighbor = [&](int nx, int ny) {
                return mag(detail::clamp_coord(nx, w), detail::clamp_coord(ny, h));
            };
            const double ahead = neighbor(x + sx, y + sy);   // brighter side
            const double behind = neighbor(x - sx, y - sy);  // darker side
            if (m >= ahead - tie && m > behind + tie) thin(x, y) = m;
        }

    std::vector<std::size_t> stack;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            if (thin(x, y) >= p.high && thin(x, y) > 0.0 && !edges(x, y)) {
                edges(x, y) = 1;
                stack.push_back(edges.index(x, y));
                while (!stack.empty()) {
                    const std::size_t i = stack.back();
                    stack.pop_back();
                    const int cx = static_cast<int>(i % static_cast<std::size_t>(w));
                    const int cy = static_cast<int>(i / static_cast<std::size_t>(w));
                    for (int oy = -1; oy <= 1; ++oy)
                        for (int ox = -1; ox <= 1; ++ox) {
                            const int nx = cx + ox, ny = cy + oy;
                            if (!edges.contains(nx, ny) || edges(nx, ny)) continue;
                            const double v = thin(nx, ny);
                            if (v > 0.0 && v >= p.low) {
                                edges(nx, ny) = 1;
                                stack.push_back(edges.index(nx, ny));
                            }
                        }
                }
            }
    return edges;
}

// 90-degree counter-clockwise rotation: (x, y) -> (y, w - 1 - x).
template <class T>
Grid<T> rot90(const Grid<T>& src) {
    Grid<T> out(src.height(), src.width());
    for (int y = 0; y < src.height(); ++y)
        for (int x = 0; x < src.width(); ++x) out(y, src.width() - 1 - x) = src(x, y);
    return out;
}

}  // namespace planforge
