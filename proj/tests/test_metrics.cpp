#include <cmath>
#include <vector>

#include "doctest.h"
#include "ffmct/filters.hpp"
#include "ffmct/metrics.hpp"
#include "ffmct/phantom.hpp"
#include "ffmct/rng.hpp"

using namespace ffmct;

namespace {

ImageGrid random_image(int w, int h, std::uint64_t seed) {
    Rng rng(seed);
    ImageGrid img(w, h);
    for (auto& v : img.values) v = static_cast<float>(rng.uniform());
    return img;
}

// Direct windowed-loop SSIM: explicit 11x11 weighted windows per pixel with
// symmetric padding. Independent of the separable-filter implementation.
double ssim_loop_oracle(const ImageGrid& a, const ImageGrid& b) {
    const int h = a.height, w = a.width;
    auto taps = gaussian_kernel(11, 1.5);
    const double c1 = 0.01 * 0.01, c2 = 0.03 * 0.03;
    double acc = 0.0;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double ma = 0, mb = 0, saa = 0, sbb = 0, sab = 0;
            for (int ky = -5; ky <= 5; ++ky) {
                for (int kx = -5; kx <= 5; ++kx) {
                    const double wgt = taps[static_cast<size_t>(ky + 5)] *
                                       taps[static_cast<size_t>(kx + 5)];
                    const auto sy = reflect_index(y + ky, h);
                    const auto sx = reflect_index(x + kx, w);
                    const double va = a.at(static_cast<int>(sy), static_cast<int>(sx));
                    const double vb = b.at(static_cast<int>(sy), static_cast<int>(sx));
                    ma += wgt * va;
                    mb += wgt * vb;
                    saa += wgt * va * va;
                    sbb += wgt * vb * vb;
                    sab += wgt * va * vb;
                }
            }
            const double va = saa - ma * ma, vb = sbb - mb * mb, cab = sab - ma * mb;
            acc += ((2 * ma * mb + c1) * (2 * cab + c2)) /
                   ((ma * ma + mb * mb + c1) * (va + vb + c2));
        }
    }
    return acc / (static_cast<double>(h) * w);
}

// Per-pixel GMSD oracle with explicit Prewitt windows.
double gmsd_loop_oracle(const ImageGrid& a, const ImageGrid& b) {
    const int h = a.height, w = a.width;
    const double c = 170.0 / (255.0 * 255.0);
    auto grad = [&](const ImageGrid& img, int y, int x) {
        double gx = 0, gy = 0;
        for (int ky = -1; ky <= 1; ++ky)
            for (int kx = -1; kx <= 1; ++kx) {
                const auto sy = reflect_index(y + ky, h);
                const auto sx = reflect_index(x + kx, w);
                const double v = img.at(static_cast<int>(sy), static_cast<int>(sx));
                gx += (kx == -1 ? 1.0 : (kx == 1 ? -1.0 : 0.0)) / 3.0 * v;
                gy += (ky == -1 ? 1.0 : (ky == 1 ? -1.0 : 0.0)) / 3.0 * v;
            }
        return std::sqrt(gx * gx + gy * gy);
    };
    std::vector<double> gms;
    gms.reserve(static_cast<size_t>(h) * w);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const double ga = grad(a, y, x), gb = grad(b, y, x);
            gms.push_back((2 * ga * gb + c) / (ga * ga + gb * gb + c));
        }
    double mean = 0;
    for (double v : gms) mean += v;
    mean /= static_cast<double>(gms.size());
    double var = 0;
    for (double v : gms) var += (v - mean) * (v - mean);
    return std::sqrt(var / static_cast<double>(gms.size()));
}

ImageGrid noisy_phantom(std::uint64_t seed, double dose) {
    ImageGrid clean = generate_phantom(seed, 64);
    NoiseModel model;
    model.dose_fraction = dose;
    return apply_noise(clean, model, seed + 1);
}

}  // namespace

TEST_CASE("ssim: identity, constant closed form, loop oracle") {
    ImageGrid x = random_image(8, 8, 1);
    CHECK(ssim(x, x) == doctest::Approx(1.0).epsilon(1e-12));

    ImageGrid a(8, 8, 0.3f), b(8, 8, 0.6f);
    const double c1 = 1e-4;
    const double expect = (2 * 0.3 * 0.6 + c1) / (0.3 * 0.3 + 0.6 * 0.6 + c1);
    CHECK(ssim(a, b) == doctest::Approx(expect).epsilon(1e-6));

    for (std::uint64_t s = 0; s < 5; ++s) {
        ImageGrid u = random_image(8, 8, 100 + s);
        ImageGrid v = random_image(8, 8, 200 + s);
        CHECK(std::abs(ssim(u, v) - ssim_loop_oracle(u, v)) < 1e-10);
    }
    CHECK_THROWS_AS(ssim(x, ImageGrid(4, 4)), Error);
}

TEST_CASE("psnr and rmse: identity, constant offset, loop oracle") {
    ImageGrid x = random_image(8, 8, 2);
    CHECK(rmse(x, x) == 0.0);
    CHECK(psnr(x, x) == 99.0);

    ImageGrid a(8, 8, 0.4f), b(8, 8, 0.5f);
    CHECK(rmse(a, b) == doctest::Approx(0.1).epsilon(1e-6));
    CHECK(psnr(a, b) == doctest::Approx(20.0).epsilon(1e-5));

    ImageGrid u = random_image(8, 8, 3), v = random_image(8, 8, 4);
    double acc = 0.0;
    for (size_t i = 0; i < u.values.size(); ++i) {
        const double d = static_cast<double>(u.values[i]) - v.values[i];
        acc += d * d;
    }
    acc /= static_cast<double>(u.values.size());
    CHECK(std::abs(rmse(u, v) - std::sqrt(acc)) < 1e-12);
    CHECK(std::abs(psnr(u, v) - 10.0 * std::log10(1.0 / acc)) < 1e-12);
}

TEST_CASE("gmsd: identity, edge sensitivity, loop oracle") {
    ImageGrid x = random_image(8, 8, 5);
    CHECK(gmsd(x, x) == doctest::Approx(0.0).epsilon(1e-12));

    ImageGrid smooth(16, 16, 0.5f);
    ImageGrid edged = smooth;
    for (int y = 0; y < 16; ++y)
        for (int x2 = 8; x2 < 16; ++x2) edged.at(y, x2) = 0.9f;
    CHECK(gmsd(smooth, edged) > 0.0);

    for (std::uint64_t s = 0; s < 5; ++s) {
        ImageGrid u = random_image(8, 8, 300 + s);
        ImageGrid v = random_image(8, 8, 400 + s);
        CHECK(std::abs(gmsd(u, v) - gmsd_loop_oracle(u, v)) < 1e-10);
    }
}

TEST_CASE("fsim: identity, symmetry, monotone degradation") {
    ImageGrid x = generate_phantom(11, 64);
    CHECK(fsim(x, x) == doctest::Approx(1.0).epsilon(1e-6));

    ImageGrid mild = noisy_phantom(11, 0.5);
    ImageGrid heavy = noisy_phantom(11, 0.02);
    CHECK(std::abs(fsim(x, mild) - fsim(mild, x)) < 1e-10);
    CHECK(fsim(heavy, x) < fsim(mild, x));

    CHECK_THROWS_AS(fsim(ImageGrid(16, 16), ImageGrid(16, 16)), Error);  // too small
}

TEST_CASE("vif: identity, noise monotonicity, rescale invariance") {
    ImageGrid x = generate_phantom(13, 64);
    CHECK(vif(x, x) == doctest::Approx(1.0).epsilon(1e-6));

    ImageGrid mild = noisy_phantom(13, 0.5);
    ImageGrid heavy = noisy_phantom(13, 0.02);
    const double v_mild = vif(mild, x), v_heavy = vif(heavy, x);
    CHECK(v_heavy < v_mild);
    CHECK(v_mild < 1.0);

    // global linear rescale of both images leaves the score unchanged
    ImageGrid xs = x, ms = mild;
    for (auto& v : xs.values) v *= 0.5f;
    for (auto& v : ms.values) v *= 0.5f;
    CHECK(vif(ms, xs) == doctest::Approx(v_mild).epsilon(1e-6));
}

TEST_CASE("nqm: identity cap and noise monotonicity") {
    ImageGrid x = generate_phantom(17, 64);
    CHECK(nqm(x, x) == 99.0);
    ImageGrid mild = noisy_phantom(17, 0.5);
    ImageGrid heavy = noisy_phantom(17, 0.02);
    CHECK(nqm(heavy, x) < nqm(mild, x));
    CHECK(nqm(mild, x) < 99.0);
}

TEST_CASE("evaluate_split: identity means, aggregation oracle, failure modes") {
    std::vector<std::pair<std::string, ImageGrid>> refs, cands;
    for (int i = 0; i < 3; ++i) {
        ImageGrid img = generate_phantom(static_cast<std::uint64_t>(20 + i), 64);
        refs.emplace_back("s" + std::to_string(i), img);
        cands.emplace_back("s" + std::to_string(i), img);
    }
    AggregateReport identity = evaluate_split(cands, refs);
    CHECK(identity.mean.ssim == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(identity.mean.fsim == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(identity.mean.vif == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(identity.mean.rmse == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(identity.mean.gmsd == doctest::Approx(0.0).epsilon(1e-9));

    // mean/std against a direct scalar re-aggregation
    std::vector<std::pair<std::string, ImageGrid>> noisy;
    for (int i = 0; i < 3; ++i)
        noisy.emplace_back("s" + std::to_string(i),
                           noisy_phantom(static_cast<std::uint64_t>(20 + i), 0.1));
    std::vector<MetricReport> per_image;
    AggregateReport agg = evaluate_split(noisy, refs, &per_image);
    REQUIRE(per_image.size() == 3);
    double mean = 0, sq = 0;
    for (const auto& r : per_image) {
        mean += r.ssim;
        sq += r.ssim * r.ssim;
    }
    mean /= 3.0;
    const double stddev = std::sqrt(sq / 3.0 - mean * mean);
    CHECK(std::abs(agg.mean.ssim - mean) < 1e-12);
    CHECK(std::abs(agg.stddev.ssim - stddev) < 1e-12);

    CHECK_THROWS_AS(evaluate_split({}, {}), Error);
    auto bad = cands;
    bad[0].first = "other";
    CHECK_THROWS_AS(evaluate_split(bad, refs), Error);
}

TEST_CASE("metric report range validation") {
    MetricReport ok;
    ok.fsim = 0.9;
    ok.ssim = 0.8;
    ok.vif = 0.7;
    ok.nqm = 12.0;
    ok.psnr = 30.0;
    ok.rmse = 0.05;
    ok.gmsd = 0.1;
    validate_report(ok);
    MetricReport bad = ok;
    bad.ssim = 1.5;
    CHECK_THROWS_AS(validate_report(bad), Error);
    bad = ok;
    bad.rmse = -0.1;
    CHECK_THROWS_AS(validate_report(bad), Error);
}
