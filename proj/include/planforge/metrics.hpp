#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "planforge/error.hpp"
#include "planforge/grid.hpp"

namespace planforge::metrics {

// Planar multi-channel image with real samples. data[(c * height + y) * width + x].
struct Image {
    int width = 0;
    int height = 0;
    int channels = 1;
    std::vector<double> data;

    Image() = default;
    Image(int w, int h, int c, double fill = 0.0)
        : width(w), height(h), channels(c),
          data(static_cast<std::size_t>(w) * h * c, fill) {}

    double& at(int x, int y, int c = 0) {
        return data[(static_cast<std::size_t>(c) * height + y) * width + x];
    }
    double at(int x, int y, int c = 0) const {
        return data[(static_cast<std::size_t>(c) * height + y) * width + x];
    }
    bool same_shape(const Image& o) const {
        return width == o.width && height == o.height && channels == o.channels;
    }
};

inline Image from_gray(const Grid<double>& g) {
    Image img(g.width(), g.height(), 1);
    for (int y = 0; y < g.height(); ++y)
        for (int x = 0; x < g.width(); ++x) img.at(x, y) = g(x, y);
    return img;
}

// 8-bit samples taken as-is (0..255). Alpha is dropped unless keep_alpha.
inline Image from_image8(const Image8& src, bool keep_alpha = false) {
    int channels = src.channels;
    if (!keep_alpha && (channels == 2 || channels == 4)) --channels;
    Image img(src.width, src.height, channels);
    for (int c = 0; c < channels; ++c)
        for (int y = 0; y < src.height; ++y)
            for (int x = 0; x < src.width; ++x) img.at(x, y, c) = src.at(x, y, c);
    return img;
}

inline void require_same_shape(const Image& a, const Image& b) {
    if (!a.same_shape(b))
        throw Error("DimensionMismatch", "images differ in size or channel count");
}

inline constexpr double kInfinite = std::numeric_limits<double>::infinity();

// 10 log10(max^2 / MSE) over every sample; +infinity when the images agree.
inline double psnr(const Image& a, const Image& b, double max_value) {
    require_same_shape(a, b);
    if (!(max_value > 0.0)) throw Error("InvalidParameter", "max_value must be > 0");
    if (a.data.empty()) throw Error("DimensionMismatch", "empty images");
    double sse = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        const double d = a.data[i] - b.data[i];
        sse += d * d;
    }
    const double mse = sse / static_cast<double>(a.data.size());
    if (mse == 0.0) return kInfinite;
    return 10.0 * std::log10(max_value * max_value / mse);
}

enum class SsimMode { global, windowed };

struct SsimConfig {
    SsimMode mode = SsimMode::windowed;
    int window = 11;
    double window_sigma = 1.5;
    double k1 = 0.01;
    double k2 = 0.03;
    double dynamic_range = 1.0;
};

// One evaluation of the luminance * contrast-structure product from moments.
inline double ssim_from_moments(double mx, double my, double vx, double vy, double cxy,
                                double c1, double c2) {
    return ((2.0 * mx * my + c1) / (mx * mx + my * my + c1)) *
           ((2.0 * cxy + c2) / (vx + vy + c2));
}

namespace detail {

// Population moments of one channel over the whole image.
inline double ssim_global_channel(const Image& a, const Image& b, int c, double c1, double c2) {
    const double n = static_cast<double>(a.width) * a.height;
    double mx = 0.0, my = 0.0;
    for (int y = 0; y < a.height; ++y)
        for (int x = 0; x < a.width; ++x) {
            mx += a.at(x, y, c);
            my += b.at(x, y, c);
        }
    mx /= n;
    my /= n;
    double vx = 0.0, vy = 0.0, cxy = 0.0;
    for (int y = 0; y < a.height; ++y)
        for (int x = 0; x < a.width; ++x) {
            const double dx = a.at(x, y, c) - mx, dy = b.at(x, y, c) - my;
            vx += dx * dx;
            vy += dy * dy;
            cxy += dx * dy;
        }
    return ssim_from_moments(mx, my, vx / n, vy / n, cxy / n, c1, c2);
}

// Mean over all fully contained Gaussian-weighted windows.
inline double ssim_windowed_channel(const Image& a, const Image& b, int c, const SsimConfig& cfg,
                                    double c1, double c2) {
    const int win = cfg.window;
    const int r = win / 2;
    std::vector<double> k(static_cast<std::size_t>(win) * win);
    double sum = 0.0;
    for (int j = 0; j < win; ++j)
        for (int i = 0; i < win; ++i) {
            const double dx = i - r, dy = j - r;
            k[j * win + i] = std::exp(-(dx * dx + dy * dy) / (2.0 * cfg.window_sigma * cfg.window_sigma));
            sum += k[j * win + i];
        }
    for (double& v : k) v /= sum;

    double total = 0.0;
    long long count = 0;
    for (int y0 = 0; y0 + win <= a.height; ++y0)
        for (int x0 = 0; x0 + win <= a.width; ++x0) {
            double mx = 0.0, my = 0.0, sxx = 0.0, syy = 0.0, sxy = 0.0;
            for (int j = 0; j < win; ++j)
                for (int i = 0; i < win; ++i) {
                    const double wgt = k[j * win + i];
                    const double va = a.at(x0 + i, y0 + j, c), vb = b.at(x0 + i, y0 + j, c);
                    mx += wgt * va;
                    my += wgt * vb;
                    sxx += wgt * va * va;
                    syy += wgt * vb * vb;
                    sxy += wgt * va * vb;
                }
            total += ssim_from_moments(mx, my, sxx - mx * mx, syy - my * my, sxy - mx * my, c1, c2);
            ++count;
        }
    return total / static_cast<double>(count);
}

}  // namespace detail

// Mean over channels. Windowed mode falls back to the global form when the
// image is smaller than one window.
inline double ssim(const Image& a, const Image& b, const SsimConfig& cfg = {}) {
    require_same_shape(a, b);
    if (!(cfg.dynamic_range > 0.0)) throw Error("InvalidParameter", "dynamic_range must be > 0");
    if (cfg.window < 1 || cfg.window % 2 == 0 || !(cfg.window_sigma > 0.0))
        throw Error("InvalidParameter", "window must be odd and positive with sigma > 0");
    if (a.data.empty()) throw Error("DimensionMismatch", "empty images");
    const double c1 = (cfg.k1 * cfg.dynamic_range) * (cfg.k1 * cfg.dynamic_range);
    const double c2 = (cfg.k2 * cfg.dynamic_range) * (cfg.k2 * cfg.dynamic_range);
    const bool windowed =
        cfg.mode == SsimMode::windowed && a.width >= cfg.window && a.height >= cfg.window;
    double total = 0.0;
    for (int c = 0; c < a.channels; ++c)
        total += windowed ? detail::ssim_windowed_channel(a, b, c, cfg, c1, c2)
                          : detail::ssim_global_channel(a, b, c, c1, c2);
    return total / a.channels;
}

struct FeatureStats {
    Eigen::VectorXd mean;
    Eigen::MatrixXd covariance;
    long long sample_count = 0;
};

// Sample mean and unbiased (N - 1) covariance of the rows of an N x D matrix.
inline FeatureStats feature_stats(const Eigen::MatrixXd& features) {
    if (features.rows() < 2)
        throw Error("TooFewSamples", "need at least 2 samples, got " + std::to_string(features.rows()));
    if (!features.allFinite()) throw Error("NonFiniteInput", "feature matrix has non-finite entries");
    FeatureStats s;
    s.sample_count = features.rows();
    s.mean = features.colwise().mean().transpose();
    const Eigen::MatrixXd centered = features.rowwise() - s.mean.transpose();
    s.covariance = (centered.transpose() * centered) / static_cast<double>(features.rows() - 1);
    s.covariance = 0.5 * (s.covariance + s.covariance.transpose());
    return s;
}

namespace detail {

// Eigenvalues of a symmetric PSD matrix; values in [-eps, 0) with
// eps = 1e-8 * max eigenvalue are taken as 0.
inline Eigen::VectorXd psd_eigenvalues(const Eigen::MatrixXd& m, Eigen::MatrixXd* vectors) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, vectors ? Eigen::ComputeEigenvectors
                                                                 : Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw Error("NumericalError", "eigendecomposition failed");
    Eigen::VectorXd ev = es.eigenvalues();
    const double eps = 1e-8 * std::max(0.0, ev.maxCoeff());
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        if (ev[i] < -eps) throw Error("NotPositiveSemidefinite", "covariance has a negative eigenvalue");
        if (ev[i] < 0.0) ev[i] = 0.0;
    }
    if (vectors) *vectors = es.eigenvectors();
    return ev;
}

}  // namespace detail

// |mu1 - mu2|^2 + Tr(S1 + S2 - 2 (S1 S2)^{1/2}), where the trace of the
// square root is taken from the eigenvalues of S1^{1/2} S2 S1^{1/2}.
inline double frechet_distance(const FeatureStats& s1, const FeatureStats& s2) {
    const auto d = s1.mean.size();
    if (s2.mean.size() != d || s1.covariance.rows() != d || s1.covariance.cols() != d ||
        s2.covariance.rows() != d || s2.covariance.cols() != d)
        throw Error("DimensionMismatch", "feature statistics differ in dimension");
    if (!s1.mean.allFinite() || !s2.mean.allFinite() || !s1.covariance.allFinite() ||
        !s2.covariance.allFinite())
        throw Error("NonFiniteInput", "feature statistics have non-finite entries");

    const Eigen::MatrixXd c1 = 0.5 * (s1.covariance + s1.covariance.transpose());
    const Eigen::MatrixXd c2 = 0.5 * (s2.covariance + s2.covariance.transpose());
    Eigen::MatrixXd v;
    const Eigen::VectorXd ev1 = detail::psd_eigenvalues(c1, &v);
    const Eigen::MatrixXd root1 = v * ev1.cwiseSqrt().asDiagonal() * v.transpose();
    Eigen::MatrixXd inner = root1 * c2 * root1;
    inner = 0.5 * (inner + inner.transpose());
    const Eigen::VectorXd ev = detail::psd_eigenvalues(inner, nullptr);

    const double mean_term = (s1.mean - s2.mean).squaredNorm();
    const double fd = mean_term + c1.trace() + c2.trace() - 2.0 * ev.cwiseSqrt().sum();
    return std::max(0.0, fd);
}

// Feature maps of one network layer, channels x height x width, plus the
// layer weight.
struct LayerMap {
    int channels = 0;
    int height = 0;
    int width = 0;
    double weight = 1.0;
    std::vector<double> data;  // [(c * height + y) * width + x]
};

using LayerFeatures = std::vector<LayerMap>;

// sum_l w_l * |phi_l(x) - phi_l(y)|^2. With `normalize`, every channel vector
// is scaled to unit length first and the squared distance is averaged over
// spatial positions instead of summed.
inline double lpips(const LayerFeatures& fx, const LayerFeatures& fy, bool normalize = false) {
    if (fx.size() != fy.size())
        throw Error("LayerMismatch", "layer counts differ: " + std::to_string(fx.size()) + " vs " +
                                         std::to_string(fy.size()));
    double total = 0.0;
    for (std::size_t l = 0; l < fx.size(); ++l) {
        const LayerMap& a = fx[l];
        const LayerMap& b = fy[l];
        const std::string tag = "layer " + std::to_string(l);
        if (a.channels != b.channels || a.height != b.height || a.width != b.width)
            throw Error("LayerMismatch", tag + ": shapes differ");
        const std::size_t n = static_cast<std::size_t>(a.channels) * a.height * a.width;
        if (a.data.size() != n || b.data.size() != n)
            throw Error("LayerMismatch", tag + ": data size does not match shape");
        if (a.weight != b.weight) throw Error("LayerMismatch", tag + ": weights differ");
        if (a.weight < 0.0) throw Error("LayerMismatch", tag + ": negative weight");

        double dist = 0.0;
        if (!normalize) {
            for (std::size_t i = 0; i < n; ++i) {
                const double d = a.data[i] - b.data[i];
                dist += d * d;
            }
        } else {
            const std::size_t plane = static_cast<std::size_t>(a.height) * a.width;
            for (std::size_t p = 0; p < plane; ++p) {
                double na = 0.0, nb = 0.0;
                for (int c = 0; c < a.channels; ++c) {
                    na += a.data[c * plane + p] * a.data[c * plane + p];
                    nb += b.data[c * plane + p] * b.data[c * plane + p];
                }
                na = std::sqrt(na) + 1e-10;
                nb = std::sqrt(nb) + 1e-10;
                for (int c = 0; c < a.channels; ++c) {
                    const double d = a.data[c * plane + p] / na - b.data[c * plane + p] / nb;
                    dist += d * d;
                }
            }
            if (plane > 0) dist /= static_cast<double>(plane);
        }
        total += a.weight * dist;
    }
    return total;
}

struct BatchOptions {
    double max_value = 255.0;
    SsimConfig ssim;
    bool lpips_normalize = false;
};

struct BatchPair {
    Image generated;
    Image reference;
    std::optional<LayerFeatures> generated_layers;
    std::optional<LayerFeatures> reference_layers;
};

struct PairScores {
    double psnr = 0.0;
    double ssim = 0.0;
    std::optional<double> lpips;
};

// Columns of a results table: FID / PSNR / LPIPS / SSIM.
struct BatchReport {
    std::size_t pairs = 0;
    double mean_psnr = 0.0;  // over finite values; +infinity if none are finite
    std::size_t psnr_infinite = 0;
    double mean_ssim = 0.0;
    std::optional<double> mean_lpips;
    std::optional<double> fid;
    std::vector<PairScores> per_pair;
};

// LPIPS is averaged when every pair carries layer features; FID is computed
// once over the two pooled feature populations when both are given.
inline BatchReport evaluate_batch(const std::vector<BatchPair>& pairs,
                                  const std::optional<Eigen::MatrixXd>& generated_features,
                                  const std::optional<Eigen::MatrixXd>& reference_features,
                                  const BatchOptions& opt = {}) {
    if (pairs.empty()) throw Error("EmptyBatch", "no image pairs to evaluate");
    BatchReport rep;
    rep.pairs = pairs.size();
    double psnr_sum = 0.0, ssim_sum = 0.0, lpips_sum = 0.0;
    std::size_t finite = 0, with_lpips = 0;
    for (const auto& p : pairs) {
        PairScores s;
        s.psnr = psnr(p.generated, p.reference, opt.max_value);
        SsimConfig sc = opt.ssim;
        s.ssim = ssim(p.generated, p.reference, sc);
        if (p.generated_layers && p.reference_layers) {
            s.lpips = lpips(*p.generated_layers, *p.reference_layers, opt.lpips_normalize);
            lpips_sum += *s.lpips;
            ++with_lpips;
        }
        if (std::isinf(s.psnr)) {
            ++rep.psnr_infinite;
        } else {
            psnr_sum += s.psnr;
            ++finite;
        }
        ssim_sum += s.ssim;
        rep.per_pair.push_back(s);
    }
    rep.mean_psnr = finite ? psnr_sum / static_cast<double>(finite) : kInfinite;
    rep.mean_ssim = ssim_sum / static_cast<double>(pairs.size());
    if (with_lpips == pairs.size()) rep.mean_lpips = lpips_sum / static_cast<double>(with_lpips);
    if (generated_features && reference_features)
        rep.fid = frechet_distance(feature_stats(*generated_features),
                                   feature_stats(*reference_features));
    return rep;
}

}  // namespace planforge::metrics
