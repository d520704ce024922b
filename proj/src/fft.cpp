#include "ffmct/fft.hpp"

#include <cmath>
#include <vector>

#include "ffmct/common.hpp"

namespace ffmct {
namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// Iterative radix-2 Cooley-Tukey on contiguous length-n arrays. No
// normalization here; callers apply the unitary scale.
void fft1d(double* re, double* im, std::int64_t n, bool inverse) {
    // bit-reversal permutation
    for (std::int64_t i = 1, j = 0; i < n; ++i) {
        std::int64_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) {
            std::swap(re[i], re[j]);
            std::swap(im[i], im[j]);
        }
    }
    double sign = inverse ? 1.0 : -1.0;
    for (std::int64_t len = 2; len <= n; len <<= 1) {
        std::int64_t half = len >> 1;
        for (std::int64_t base = 0; base < n; base += len) {
            for (std::int64_t k = 0; k < half; ++k) {
                // direct trig per index keeps the accumulated error tiny
                double ang = sign * kTwoPi * static_cast<double>(k) / static_cast<double>(len);
                double wr = std::cos(ang), wi = std::sin(ang);
                std::int64_t a = base + k, b = base + k + half;
                double tr = re[b] * wr - im[b] * wi;
                double ti = re[b] * wi + im[b] * wr;
                re[b] = re[a] - tr;
                im[b] = im[a] - ti;
                re[a] += tr;
                im[a] += ti;
            }
        }
    }
}

}  // namespace

void fft2_plane_inplace(std::span<double> re, std::span<double> im, std::int64_t height,
                        std::int64_t width, bool inverse) {
    FFMCT_CHECK_ARG(is_power_of_two(height) && is_power_of_two(width),
                    "fft2 requires power-of-two extents, got ", height, "x", width);
    FFMCT_CHECK_ARG(static_cast<std::int64_t>(re.size()) == height * width &&
                        re.size() == im.size(),
                    "fft2 plane buffer size mismatch");

    for (std::int64_t y = 0; y < height; ++y) {
        fft1d(re.data() + y * width, im.data() + y * width, width, inverse);
    }
    std::vector<double> cr(static_cast<size_t>(height)), ci(static_cast<size_t>(height));
    for (std::int64_t x = 0; x < width; ++x) {
        for (std::int64_t y = 0; y < height; ++y) {
            cr[static_cast<size_t>(y)] = re[y * width + x];
            ci[static_cast<size_t>(y)] = im[y * width + x];
        }
        fft1d(cr.data(), ci.data(), height, inverse);
        for (std::int64_t y = 0; y < height; ++y) {
            re[y * width + x] = cr[static_cast<size_t>(y)];
            im[y * width + x] = ci[static_cast<size_t>(y)];
        }
    }
    double scale = 1.0 / std::sqrt(static_cast<double>(height * width));
    for (size_t i = 0; i < re.size(); ++i) {
        re[i] *= scale;
        im[i] *= scale;
    }
}

}  // namespace ffmct
