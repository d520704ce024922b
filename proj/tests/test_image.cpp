#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "ffmct/image.hpp"
#include "ffmct/rng.hpp"

using namespace ffmct;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
    auto dir = fs::temp_directory_path() / "ffmct_image_test";
    fs::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("image validation enforces range and extents") {
    ImageGrid ok(4, 4, 0.5f);
    validate_image(ok, "test");

    ImageGrid bad(4, 4, 0.5f);
    bad.values[3] = 1.5f;
    CHECK_THROWS_AS(validate_image(bad, "test"), Error);
    bad.values[3] = -0.1f;
    CHECK_THROWS_AS(validate_image(bad, "test"), Error);

    ImageGrid odd(4, 4, 0.0f);
    odd.values.pop_back();
    CHECK_THROWS_AS(validate_image(odd, "test"), Error);
}

TEST_CASE("raw f32 roundtrip with sidecar") {
    Rng rng(1);
    ImageGrid img(8, 8);
    for (auto& v : img.values) v = static_cast<float>(rng.uniform());
    auto path = temp_dir() / "sample.f32";
    write_image_raw(path, img, "ndct");
    ImageGrid back = read_image_raw(path);
    CHECK(back.width == img.width);
    CHECK(back.height == img.height);
    CHECK(back.values == img.values);  // bit-exact

    // sidecar carries the role
    std::ifstream side(path.string() + ".json");
    std::string text((std::istreambuf_iterator<char>(side)), std::istreambuf_iterator<char>());
    CHECK(text.find("\"role\":\"ndct\"") != std::string::npos);
}

TEST_CASE("png preview has a valid signature and IHDR") {
    ImageGrid img(16, 8);
    for (size_t i = 0; i < img.values.size(); ++i)
        img.values[i] = static_cast<float>(i) / static_cast<float>(img.values.size());
    auto path = temp_dir() / "preview.png";
    write_png_gray8(path, img);

    std::ifstream in(path, std::ios::binary);
    std::vector<unsigned char> head(24);
    in.read(reinterpret_cast<char*>(head.data()), 24);
    const unsigned char sig[8] = {0x89, 'P', 'N', 'G', 0x0d, 0x0a, 0x1a, 0x0a};
    for (int i = 0; i < 8; ++i) CHECK(head[static_cast<size_t>(i)] == sig[i]);
    // width 16, height 8 big-endian in IHDR
    CHECK(head[19] == 16);
    CHECK(head[23] == 8);
}

TEST_CASE("tensor bridges preserve values and clip on request") {
    ImageGrid img(4, 2);
    for (size_t i = 0; i < img.values.size(); ++i) img.values[i] = 0.125f * static_cast<float>(i);
    Tensor t = image_to_tensor(img);
    CHECK(t.shape() == Shape{1, 1, 2, 4});
    ImageGrid back = tensor_to_image(t);
    CHECK(back.values == img.values);

    Tensor wild = Tensor::from_data({1, 1, 1, 2}, {-0.5, 1.5});
    ImageGrid clipped = tensor_to_image(wild, /*clip=*/true);
    CHECK(clipped.values[0] == 0.0f);
    CHECK(clipped.values[1] == 1.0f);
}
