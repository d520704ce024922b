#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "ffmct/metrics.hpp"
#include "ffmct/phantom.hpp"

using namespace ffmct;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
    auto dir = fs::temp_directory_path() / "ffmct_phantom_test" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("generate_phantom: determinism, range, seed sensitivity") {
    ImageGrid a = generate_phantom(1, 64);
    ImageGrid b = generate_phantom(1, 64);
    CHECK(a.values == b.values);  // bit-identical

    validate_image(a, "phantom");  // support within [0,1]

    ImageGrid c = generate_phantom(2, 64);
    double diff = 0.0;
    for (size_t i = 0; i < a.values.size(); ++i)
        diff += std::abs(static_cast<double>(a.values[i]) - c.values[i]);
    diff /= static_cast<double>(a.values.size());
    CHECK(diff > 0.01);

    CHECK_THROWS_AS(generate_phantom(1, 48), Error);  // not a power of two
}

TEST_CASE("deform: identity, integer translation, smooth field similarity") {
    ImageGrid img = generate_phantom(3, 64);

    DeformationField zero = make_deformation(7, 64, 0.0);
    ImageGrid same = deform(img, zero);
    CHECK(same.values == img.values);

    // dx = 1 shifts content left by one pixel away from the border
    DeformationField shift;
    shift.width = 64;
    shift.height = 64;
    shift.max_magnitude = 1.0;
    shift.dx.assign(64 * 64, 1.0f);
    shift.dy.assign(64 * 64, 0.0f);
    ImageGrid shifted = deform(img, shift);
    for (int y = 0; y < 64; ++y)
        for (int x = 0; x < 63; ++x)
            CHECK(shifted.at(y, x) == doctest::Approx(img.at(y, x + 1)).epsilon(1e-6));

    DeformationField field = make_deformation(8, 64, 3.0);
    double mx = 0.0;
    for (size_t i = 0; i < field.dx.size(); ++i)
        mx = std::max(mx, std::hypot(static_cast<double>(field.dx[i]), field.dy[i]));
    CHECK(mx <= 3.0 + 1e-4);

    ImageGrid warped = deform(img, field);
    const double s = ssim(img, warped);
    CHECK(s < 1.0);
    CHECK(s > 0.5);
    CHECK(s < 0.99);  // misalignment is structural, not photometric
}

TEST_CASE("apply_noise: noiseless limit, determinism, heavy-dose degradation") {
    ImageGrid img = generate_phantom(5, 64);

    NoiseModel clean_model;
    clean_model.dose_fraction = 1.0;
    clean_model.photon_scale = 1e12;
    clean_model.electronic_sigma = 0.0;
    ImageGrid nearly = apply_noise(img, clean_model, 9);
    double mx = 0.0;
    for (size_t i = 0; i < img.values.size(); ++i)
        mx = std::max(mx, std::abs(static_cast<double>(img.values[i]) - nearly.values[i]));
    CHECK(mx < 0.01);

    NoiseModel model;  // defaults: 2% dose
    ImageGrid n1 = apply_noise(img, model, 11);
    ImageGrid n2 = apply_noise(img, model, 11);
    CHECK(n1.values == n2.values);

    // ultra-low-dose regime: structural similarity collapses (mean over 50 seeds)
    double acc = 0.0;
    for (std::uint64_t s = 0; s < 50; ++s) {
        ImageGrid ph = generate_phantom(100 + s, 64);
        acc += ssim(apply_noise(ph, model, 200 + s), ph);
    }
    acc /= 50.0;
    CHECK(acc < 0.6);

    CHECK_THROWS_AS(apply_noise(img, NoiseModel{0.0, 1e4, 0.0, 4.0}, 1), Error);
}

TEST_CASE("split_counts: documented rounding") {
    int tr = 0, va = 0, te = 0;
    split_counts(10, tr, va, te);
    CHECK(tr == 7);
    CHECK(va == 2);
    CHECK(te == 1);
    split_counts(300, tr, va, te);
    CHECK(tr == 210);
    CHECK(va == 45);
    CHECK(te == 45);
    for (int n : {1, 2, 3, 7, 20, 33}) {
        split_counts(n, tr, va, te);
        CHECK(tr + va + te == n);
        CHECK(tr >= 1);
    }
}

TEST_CASE("build_dataset: manifest, determinism, noise ordering, overwrite guard") {
    DatasetConfig cfg;
    cfg.seed = 77;
    cfg.count = 10;
    cfg.image_size = 64;

    auto dir1 = fresh_dir("d1");
    DatasetManifest m1 = build_dataset(cfg, dir1);
    CHECK(m1.samples.size() == 10);
    CHECK(m1.split_samples("train").size() == 7);
    CHECK(m1.split_samples("val").size() == 2);
    CHECK(m1.split_samples("test").size() == 1);

    DatasetManifest loaded = load_manifest(dir1 / "manifest.json");
    CHECK(loaded.samples.size() == 10);
    CHECK(loaded.config.seed == 77);

    // byte-identical regeneration
    auto dir2 = fresh_dir("d2");
    build_dataset(cfg, dir2);
    for (const auto& s : m1.samples) {
        CHECK(slurp(dir1 / s.ndct) == slurp(dir2 / s.ndct));
        CHECK(slurp(dir1 / s.uldct) == slurp(dir2 / s.uldct));
    }

    // noise strictly reduces similarity vs the noiseless deformed twin
    for (const auto& s : m1.samples) {
        ImageGrid ndct = read_image_raw(dir1 / s.ndct);
        ImageGrid uldct = read_image_raw(dir1 / s.uldct);
        ImageGrid moved = read_image_raw(dir1 / s.deformed);
        CHECK(ssim(ndct, uldct) < ssim(ndct, moved));
    }

    CHECK_THROWS_AS(build_dataset(cfg, dir1), Error);        // refuses overwrite
    CHECK_NOTHROW(build_dataset(cfg, dir1, /*force=*/true));  // unless forced
}
