#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "planforge/feature_io.hpp"
#include "planforge/metrics.hpp"

using namespace planforge;
using namespace planforge::metrics;

namespace {

Image constant(int w, int h, int c, double v) { return Image(w, h, c, v); }

Image checkerboard(int w, int h, bool inverted) {
    Image img(w, h, 1);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) img.at(x, y) = ((x + y) % 2 == 0) != inverted ? 1.0 : 0.0;
    return img;
}

Image random_image(std::mt19937_64& rng, int w, int h, int c, double scale = 1.0) {
    std::uniform_real_distribution<double> u(0.0, scale);
    Image img(w, h, c);
    for (double& v : img.data) v = u(rng);
    return img;
}

Image modular(int w, int h, int a, int b, int m) {
    Image img(w, h, 1);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) img.at(x, y) = ((x * a + y * b) % m) / double(m - 1);
    return img;
}

FeatureStats diag_stats(const Eigen::VectorXd& mean, const Eigen::VectorXd& var) {
    FeatureStats s;
    s.mean = mean;
    s.covariance = var.asDiagonal();
    s.sample_count = 100;
    return s;
}

LayerMap layer(int c, int h, int w, double weight, double fill) {
    LayerMap m;
    m.channels = c;
    m.height = h;
    m.width = w;
    m.weight = weight;
    m.data.assign(static_cast<std::size_t>(c) * h * w, fill);
    return m;
}

template <class F>
std::string code_of(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    return "no error";
}

}  // namespace

TEST(Psnr, IdenticalImagesAreInfinite) {
    std::mt19937_64 rng(1);
    const Image a = random_image(rng, 8, 8, 3, 255.0);
    EXPECT_EQ(psnr(a, a, 255.0), kInfinite);
}

TEST(Psnr, FullScaleDifferenceIsZeroDecibels) {
    EXPECT_NEAR(psnr(constant(4, 4, 1, 0.0), constant(4, 4, 1, 255.0), 255.0), 0.0, 1e-9);
}

TEST(Psnr, ConstantOffsetOf16) {
    // 10 log10(255^2 / 16^2) = 24.04840 dB.
    const double want = 10.0 * std::log10(65025.0 / 256.0);
    EXPECT_NEAR(want, 24.0484, 5e-5);
    EXPECT_NEAR(psnr(constant(5, 3, 3, 100.0), constant(5, 3, 3, 116.0), 255.0), want, 1e-9);
}

TEST(Psnr, ShiftLaw) {
    std::mt19937_64 rng(2);
    for (int i = 0; i < 20; ++i) {
        Image a = random_image(rng, 9, 7, 2, 200.0);
        Image b = random_image(rng, 9, 7, 2, 200.0);
        const double before = psnr(a, b, 255.0);
        for (double& v : a.data) v += 17.25;
        for (double& v : b.data) v += 17.25;
        EXPECT_NEAR(psnr(a, b, 255.0), before, 1e-9);
    }
}

TEST(Psnr, Errors) {
    EXPECT_EQ(code_of([] { psnr(constant(2, 2, 1, 0), constant(2, 3, 1, 0), 1.0); }), "DimensionMismatch");
    EXPECT_EQ(code_of([] { psnr(constant(2, 2, 1, 0), constant(2, 2, 3, 0), 1.0); }), "DimensionMismatch");
    EXPECT_EQ(code_of([] { psnr(constant(2, 2, 1, 0), constant(2, 2, 1, 0), 0.0); }), "InvalidParameter");
}

TEST(Ssim, IdenticalImagesScoreOne) {
    std::mt19937_64 rng(3);
    const Image a = random_image(rng, 32, 24, 3);
    EXPECT_NEAR(ssim(a, a), 1.0, 1e-12);
    EXPECT_NEAR(ssim(a, a, {SsimMode::global}), 1.0, 1e-12);
}

TEST(Ssim, EqualConstantsScoreOne) {
    EXPECT_NEAR(ssim(constant(16, 16, 1, 0.3), constant(16, 16, 1, 0.3)), 1.0, 1e-12);
    EXPECT_NEAR(ssim(constant(4, 4, 1, 0.0), constant(4, 4, 1, 0.0), {SsimMode::global}), 1.0, 1e-12);
}

TEST(Ssim, CheckerboardAgainstInverse) {
    // Both images: mean 1/2, variance 1/4, covariance -1/4; c1 = 1e-4, c2 = 9e-4.
    const double want = ((2 * 0.25 + 1e-4) / (0.25 + 0.25 + 1e-4)) *
                        ((2 * -0.25 + 9e-4) / (0.25 + 0.25 + 9e-4));
    EXPECT_NEAR(want, -0.4991 / 0.5009, 1e-15);
    EXPECT_NEAR(ssim(checkerboard(16, 16, false), checkerboard(16, 16, true), {SsimMode::global}), want,
                1e-9);
}

TEST(Ssim, WindowedMatchesScikitImage) {
    // skimage.metrics.structural_similarity(a, b, gaussian_weights=True, sigma=1.5,
    // use_sample_covariance=False, data_range=1.0) on these closed-form images.
    const Image a = modular(24, 20, 7, 13, 17);
    const Image b = modular(24, 20, 5, 3, 11);
    EXPECT_NEAR(ssim(a, b), 0.050461558851763656, 1e-9);
}

TEST(Ssim, Symmetric) {
    std::mt19937_64 rng(4);
    for (int i = 0; i < 10; ++i) {
        const Image a = random_image(rng, 20, 14, 2);
        const Image b = random_image(rng, 20, 14, 2);
        for (SsimMode m : {SsimMode::global, SsimMode::windowed}) {
            const double ab = ssim(a, b, {m}), ba = ssim(b, a, {m});
            EXPECT_NEAR(ab, ba, 1e-12);
            EXPECT_GE(ab, -1.0);
            EXPECT_LE(ab, 1.0);
        }
    }
}

TEST(Ssim, SmallImagesUseGlobalForm) {
    std::mt19937_64 rng(5);
    const Image a = random_image(rng, 8, 30, 1);
    const Image b = random_image(rng, 8, 30, 1);
    EXPECT_DOUBLE_EQ(ssim(a, b), ssim(a, b, {SsimMode::global}));
}

TEST(Ssim, ChannelMean) {
    std::mt19937_64 rng(6);
    const Image a = random_image(rng, 12, 12, 2);
    const Image b = random_image(rng, 12, 12, 2);
    Image a0(12, 12, 1), a1(12, 12, 1), b0(12, 12, 1), b1(12, 12, 1);
    const std::size_t plane = 144;
    std::copy_n(a.data.begin(), plane, a0.data.begin());
    std::copy_n(a.data.begin() + plane, plane, a1.data.begin());
    std::copy_n(b.data.begin(), plane, b0.data.begin());
    std::copy_n(b.data.begin() + plane, plane, b1.data.begin());
    EXPECT_NEAR(ssim(a, b), 0.5 * (ssim(a0, b0) + ssim(a1, b1)), 1e-12);
}

TEST(Ssim, Errors) {
    EXPECT_EQ(code_of([] { ssim(constant(2, 2, 1, 0), constant(3, 2, 1, 0)); }), "DimensionMismatch");
    SsimConfig bad;
    bad.dynamic_range = 0.0;
    EXPECT_EQ(code_of([&] { ssim(constant(2, 2, 1, 0), constant(2, 2, 1, 0), bad); }), "InvalidParameter");
}

TEST(FeatureStats, EqualRowsHaveZeroCovariance) {
    Eigen::MatrixXd f(5, 3);
    f.rowwise() = Eigen::RowVector3d(1.0, -2.0, 3.5);
    const FeatureStats s = feature_stats(f);
    EXPECT_EQ(s.mean, Eigen::Vector3d(1.0, -2.0, 3.5));
    EXPECT_TRUE(s.covariance.isZero(0.0));
    EXPECT_EQ(s.sample_count, 5);
}

TEST(FeatureStats, TwoSamplesUnbiased) {
    Eigen::MatrixXd f(2, 1);
    f << 0.0, 2.0;
    const FeatureStats s = feature_stats(f);
    EXPECT_DOUBLE_EQ(s.mean(0), 1.0);
    EXPECT_DOUBLE_EQ(s.covariance(0, 0), 2.0);
}

TEST(FeatureStats, Errors) {
    EXPECT_EQ(code_of([] { feature_stats(Eigen::MatrixXd::Zero(1, 4)); }), "TooFewSamples");
    Eigen::MatrixXd f = Eigen::MatrixXd::Zero(3, 2);
    f(1, 1) = std::nan("");
    EXPECT_EQ(code_of([&] { feature_stats(f); }), "NonFiniteInput");
}

TEST(Frechet, IdenticalStatsGiveZero) {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> n(0.0, 1.0);
    Eigen::MatrixXd f(50, 6);
    for (Eigen::Index i = 0; i < f.size(); ++i) f.data()[i] = n(rng);
    const FeatureStats s = feature_stats(f);
    EXPECT_NEAR(frechet_distance(s, s), 0.0, 1e-8);
}

TEST(Frechet, OneDimensionalUnitShift) {
    const auto a = diag_stats(Eigen::VectorXd::Constant(1, 0.0), Eigen::VectorXd::Constant(1, 1.0));
    const auto b = diag_stats(Eigen::VectorXd::Constant(1, 1.0), Eigen::VectorXd::Constant(1, 1.0));
    EXPECT_NEAR(frechet_distance(a, b), 1.0, 1e-12);
}

TEST(Frechet, ScaledIdentities) {
    for (int d : {1, 3, 8, 32}) {
        const auto a = diag_stats(Eigen::VectorXd::Zero(d), Eigen::VectorXd::Constant(d, 4.0));
        const auto b = diag_stats(Eigen::VectorXd::Zero(d), Eigen::VectorXd::Constant(d, 9.0));
        EXPECT_NEAR(frechet_distance(a, b), static_cast<double>(d), 1e-9);
    }
}

TEST(Frechet, DiagonalClosedForm) {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> mu(-3.0, 3.0), var(0.0, 5.0);
    std::uniform_int_distribution<int> dim(1, 16);
    for (int i = 0; i < 100; ++i) {
        const int d = dim(rng);
        Eigen::VectorXd m1(d), m2(d), v1(d), v2(d);
        double want = 0.0;
        for (int k = 0; k < d; ++k) {
            m1(k) = mu(rng);
            m2(k) = mu(rng);
            v1(k) = var(rng);
            v2(k) = var(rng);
            const double dm = m1(k) - m2(k);
            want += dm * dm + v1(k) + v2(k) - 2.0 * std::sqrt(v1(k) * v2(k));
        }
        EXPECT_NEAR(frechet_distance(diag_stats(m1, v1), diag_stats(m2, v2)), want, 1e-6);
    }
}

TEST(Frechet, RotationInvariantFullCovariance) {
    // Rotating both populations by the same orthogonal matrix leaves the distance fixed.
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> var(0.1, 4.0), mu(-1.0, 1.0);
    for (int i = 0; i < 20; ++i) {
        const int d = 5;
        Eigen::VectorXd m1(d), m2(d), v1(d), v2(d);
        for (int k = 0; k < d; ++k) {
            m1(k) = mu(rng);
            m2(k) = mu(rng);
            v1(k) = var(rng);
            v2(k) = var(rng);
        }
        Eigen::MatrixXd r = Eigen::MatrixXd::Random(d, d);
        const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(r).householderQ();
        FeatureStats a = diag_stats(m1, v1), b = diag_stats(m1, v2);
        FeatureStats ra = a, rb = b;
        ra.mean = q * m1;
        rb.mean = q * m1;
        ra.covariance = q * a.covariance * q.transpose();
        rb.covariance = q * b.covariance * q.transpose();
        EXPECT_NEAR(frechet_distance(ra, rb), frechet_distance(a, b), 1e-8);
        (void)m2;
    }
}

TEST(Frechet, SymmetricAndNonNegative) {
    std::mt19937_64 rng(10);
    std::normal_distribution<double> n(0.0, 1.0);
    for (int i = 0; i < 20; ++i) {
        Eigen::MatrixXd f1(30, 4), f2(30, 4);
        for (Eigen::Index k = 0; k < f1.size(); ++k) {
            f1.data()[k] = n(rng);
            f2.data()[k] = 1.5 * n(rng) + 0.3;
        }
        const FeatureStats a = feature_stats(f1), b = feature_stats(f2);
        const double ab = frechet_distance(a, b);
        EXPECT_GE(ab, 0.0);
        EXPECT_NEAR(ab, frechet_distance(b, a), 1e-8);
    }
}

TEST(Frechet, SingularCovarianceIsAllowed) {
    Eigen::MatrixXd f(3, 2);
    f << 0, 0, 1, 1, 2, 2;  // rank-1 covariance
    const FeatureStats s = feature_stats(f);
    EXPECT_NEAR(frechet_distance(s, s), 0.0, 1e-8);
}

TEST(Frechet, Errors) {
    const auto a = diag_stats(Eigen::VectorXd::Zero(2), Eigen::VectorXd::Ones(2));
    const auto b = diag_stats(Eigen::VectorXd::Zero(3), Eigen::VectorXd::Ones(3));
    EXPECT_EQ(code_of([&] { frechet_distance(a, b); }), "DimensionMismatch");
    auto c = a;
    c.mean(0) = std::numeric_limits<double>::infinity();
    EXPECT_EQ(code_of([&] { frechet_distance(a, c); }), "NonFiniteInput");
    auto neg = a;
    neg.covariance(0, 0) = -1.0;
    EXPECT_EQ(code_of([&] { frechet_distance(neg, a); }), "NotPositiveSemidefinite");
}

TEST(Lpips, HandCase) {
    const LayerFeatures x{layer(1, 2, 2, 2.0, 0.0)};
    const LayerFeatures y{layer(1, 2, 2, 2.0, 1.0)};
    EXPECT_EQ(lpips(x, y), 8.0);
}

TEST(Lpips, ZeroWeightsAndIdentity) {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> n(0.0, 1.0);
    LayerFeatures x{layer(3, 4, 5, 0.0, 0.0), layer(2, 2, 2, 0.0, 0.0)};
    LayerFeatures y = x;
    for (auto& l : y)
        for (double& v : l.data) v = n(rng);
    EXPECT_EQ(lpips(x, y), 0.0);
    for (auto& l : x) l.weight = 1.0;
    EXPECT_EQ(lpips(x, x), 0.0);
}

TEST(Lpips, SumOverLayersAndSymmetry) {
    std::mt19937_64 rng(12);
    std::normal_distribution<double> n(0.0, 1.0);
    LayerFeatures x{layer(3, 4, 4, 0.5, 0.0), layer(5, 2, 3, 1.5, 0.0)};
    LayerFeatures y = x;
    for (auto* f : {&x, &y})
        for (auto& l : *f)
            for (double& v : l.data) v = n(rng);
    double want = 0.0;
    for (std::size_t l = 0; l < x.size(); ++l) {
        double s = 0.0;
        for (std::size_t i = 0; i < x[l].data.size(); ++i)
            s += (x[l].data[i] - y[l].data[i]) * (x[l].data[i] - y[l].data[i]);
        want += x[l].weight * s;
    }
    EXPECT_NEAR(lpips(x, y), want, 1e-12);
    EXPECT_NEAR(lpips(x, y, true), lpips(y, x, true), 1e-12);
}

TEST(Lpips, NormalizedIgnoresChannelScale) {
    LayerMap a = layer(2, 1, 2, 1.0, 0.0);
    a.data = {3.0, 1.0, 4.0, 0.0};  // positions (3,4) and (1,0)
    LayerMap b = a;
    for (double& v : b.data) v *= 7.0;
    EXPECT_NEAR(lpips({a}, {b}, true), 0.0, 1e-12);
    LayerMap c = layer(2, 1, 2, 1.0, 0.0);
    c.data = {0.0, 1.0, 1.0, 0.0};  // unit vectors (0,1) and (1,0)
    // Position 0: (0.6,0.8) vs (0,1) -> 0.36 + 0.04; position 1: identical.
    EXPECT_NEAR(lpips({a}, {c}, true), 0.4 / 2.0, 1e-9);
}

TEST(Lpips, Mismatches) {
    EXPECT_EQ(code_of([] { lpips({layer(1, 1, 1, 1, 0)}, {}); }), "LayerMismatch");
    EXPECT_EQ(code_of([] { lpips({layer(1, 1, 2, 1, 0)}, {layer(1, 2, 1, 1, 0)}); }), "LayerMismatch");
    EXPECT_EQ(code_of([] { lpips({layer(1, 1, 1, 1, 0)}, {layer(1, 1, 1, 2, 0)}); }), "LayerMismatch");
}

TEST(EvaluateBatch, IdenticalPairs) {
    std::mt19937_64 rng(13);
    std::vector<BatchPair> pairs;
    for (int i = 0; i < 4; ++i) {
        const Image a = random_image(rng, 16, 16, 3, 255.0);
        pairs.push_back({a, a, std::nullopt, std::nullopt});
    }
    const BatchReport rep = evaluate_batch(pairs, std::nullopt, std::nullopt);
    EXPECT_EQ(rep.psnr_infinite, 4u);
    EXPECT_EQ(rep.mean_psnr, kInfinite);
    EXPECT_NEAR(rep.mean_ssim, 1.0, 1e-12);
    EXPECT_FALSE(rep.mean_lpips.has_value());
    EXPECT_FALSE(rep.fid.has_value());
}

TEST(EvaluateBatch, MeansOfPerPairOracles) {
    std::mt19937_64 rng(14);
    BatchOptions opt;
    opt.ssim.dynamic_range = 255.0;
    std::vector<BatchPair> pairs;
    double psnr_sum = 0.0, ssim_sum = 0.0, lpips_sum = 0.0;
    for (int i = 0; i < 5; ++i) {
        const Image a = random_image(rng, 14, 12, 3, 255.0);
        const Image b = random_image(rng, 14, 12, 3, 255.0);
        LayerFeatures fa{layer(2, 3, 3, 1.0, 0.1 * i)}, fb{layer(2, 3, 3, 1.0, 0.0)};
        pairs.push_back({a, b, fa, fb});
        psnr_sum += psnr(a, b, 255.0);
        ssim_sum += ssim(a, b, opt.ssim);
        lpips_sum += 18.0 * (0.1 * i) * (0.1 * i);
    }
    Eigen::MatrixXd g = Eigen::MatrixXd::Random(20, 3), r = Eigen::MatrixXd::Random(20, 3);
    const BatchReport rep = evaluate_batch(pairs, g, r, opt);
    EXPECT_EQ(rep.pairs, 5u);
    EXPECT_NEAR(rep.mean_psnr, psnr_sum / 5.0, 1e-12);
    EXPECT_NEAR(rep.mean_ssim, ssim_sum / 5.0, 1e-12);
    ASSERT_TRUE(rep.mean_lpips.has_value());
    EXPECT_NEAR(*rep.mean_lpips, lpips_sum / 5.0, 1e-12);
    ASSERT_TRUE(rep.fid.has_value());
    EXPECT_NEAR(*rep.fid, frechet_distance(feature_stats(g), feature_stats(r)), 1e-12);
}

TEST(EvaluateBatch, SinglePairEqualsItsScores) {
    std::mt19937_64 rng(15);
    const Image a = random_image(rng, 12, 12, 1, 255.0);
    const Image b = random_image(rng, 12, 12, 1, 255.0);
    const BatchReport rep = evaluate_batch({{a, b, std::nullopt, std::nullopt}}, std::nullopt, std::nullopt);
    EXPECT_EQ(rep.mean_psnr, psnr(a, b, 255.0));
    EXPECT_EQ(rep.mean_ssim, rep.per_pair[0].ssim);
}

TEST(EvaluateBatch, EmptyIsAnError) {
    EXPECT_EQ(code_of([] { evaluate_batch({}, std::nullopt, std::nullopt); }), "EmptyBatch");
}

TEST(FeatureFiles, BinaryMatrixRoundTrip) {
    Eigen::MatrixXd m(3, 4);
    m << 1, 2, 3, 4, 5.5, -6, 7, 8, 0, 0.25, -1e3, 9;
    const std::string bytes = features::encode_matrix(m);
    EXPECT_EQ(bytes.substr(0, 4), "PLNF");
    EXPECT_EQ(bytes.size(), 16u + 12u * 4u);
    EXPECT_EQ(features::decode_matrix(bytes), m);
    EXPECT_EQ(code_of([&] { features::decode_matrix(bytes.substr(0, bytes.size() - 1)); }), "FormatError");
}

TEST(FeatureFiles, CsvParsing) {
    const Eigen::MatrixXd m = features::parse_csv("# header\n1, 2,3\n\n4,5,6\n");
    ASSERT_EQ(m.rows(), 2);
    ASSERT_EQ(m.cols(), 3);
    EXPECT_EQ(m(1, 2), 6.0);
    EXPECT_EQ(code_of([] { features::parse_csv("1,2\n3\n"); }), "ParseError");
    EXPECT_EQ(code_of([] { features::parse_csv("1,x\n"); }), "ParseError");
    EXPECT_EQ(features::parse_csv(features::format_csv(m)), m);
}

TEST(FeatureFiles, FilesDetectTheirFormat) {
    const auto dir = std::filesystem::temp_directory_path();
    Eigen::MatrixXd m = Eigen::MatrixXd::Random(4, 2).array().round();
    features::save_matrix(dir / "pf_metrics_test.csv", m);
    features::save_matrix(dir / "pf_metrics_test.bin", m);
    EXPECT_EQ(features::load_matrix(dir / "pf_metrics_test.csv"), m);
    EXPECT_EQ(features::load_matrix(dir / "pf_metrics_test.bin"), m);
    std::filesystem::remove(dir / "pf_metrics_test.csv");
    std::filesystem::remove(dir / "pf_metrics_test.bin");
    EXPECT_EQ(code_of([&] { features::load_matrix(dir / "pf_does_not_exist.bin"); }), "IoError");
}

TEST(FeatureFiles, LayerRoundTrip) {
    LayerFeatures f{layer(2, 3, 4, 0.5, 0.25), layer(1, 1, 1, 2.0, -3.0)};
    f[0].data[5] = 1.75;
    const LayerFeatures back = features::decode_layers(features::encode_layers(f));
    ASSERT_EQ(back.size(), 2u);
    EXPECT_EQ(back[0].channels, 2);
    EXPECT_EQ(back[0].width, 4);
    EXPECT_EQ(back[0].weight, 0.5);
    EXPECT_EQ(back[0].data, f[0].data);
    EXPECT_EQ(back[1].data, f[1].data);
    EXPECT_EQ(lpips(f, back), 0.0);
}
