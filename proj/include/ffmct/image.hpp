#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ffmct/tensor.hpp"

namespace ffmct {

// 2-D scalar field in [0,1]; the universal image carrier. Stored in single
// precision; numeric modules compute in double internally.
struct ImageGrid {
    int width = 0;
    int height = 0;
    std::vector<float> values;  // row-major, height rows of width values

    ImageGrid() = default;
    ImageGrid(int w, int h, float fill = 0.0f)
        : width(w), height(h), values(static_cast<size_t>(w) * h, fill) {}

    float at(int y, int x) const { return values[static_cast<size_t>(y) * width + x]; }
    float& at(int y, int x) { return values[static_cast<size_t>(y) * width + x]; }
    size_t size() const { return values.size(); }
    bool same_extents(const ImageGrid& other) const {
        return width == other.width && height == other.height;
    }
};

// Per-pixel {0,1} field with the extents of its source image.
struct BinaryMask {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> bits;

    BinaryMask() = default;
    BinaryMask(int w, int h, std::uint8_t fill = 0)
        : width(w), height(h), bits(static_cast<size_t>(w) * h, fill) {}

    std::uint8_t at(int y, int x) const { return bits[static_cast<size_t>(y) * width + x]; }
    std::uint8_t& at(int y, int x) { return bits[static_cast<size_t>(y) * width + x]; }
    size_t size() const { return bits.size(); }
};

// Enforces the ImageGrid invariants (finite, in [0,1]).
void validate_image(const ImageGrid& img, const char* what);

void check_same_extents(const ImageGrid& a, const ImageGrid& b, const char* what);

ImageGrid mask_to_image(const BinaryMask& mask);

// ---- persistence ----------------------------------------------------------
// Images are stored as raw little-endian f32 with a one-line JSON sidecar
// {"width":..,"height":..,"role":".."} and an 8-bit PNG preview.

void write_image_raw(const std::filesystem::path& path, const ImageGrid& img,
                     const std::string& role, bool with_png_preview = true);
ImageGrid read_image_raw(const std::filesystem::path& path);

// Minimal zlib-backed grayscale PNG writer (preview only).
void write_png_gray8(const std::filesystem::path& path, const ImageGrid& img);

// ---- tensor bridges --------------------------------------------------------

Tensor image_to_tensor(const ImageGrid& img, bool requires_grad = false);  // [1,1,H,W]
// Converts the [1,1,H,W] (or [H,W]-sized) tensor back; clips to [0,1] when asked.
ImageGrid tensor_to_image(const Tensor& t, bool clip = false);

}  // namespace ffmct
