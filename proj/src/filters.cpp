#include "ffmct/filters.hpp"

#include <cmath>

#include "ffmct/common.hpp"

namespace ffmct {

std::int64_t reflect_index(std::int64_t i, std::int64_t n) {
    // symmetric padding, repeated until in range (kernels can exceed extents)
    while (i < 0 || i >= n) {
        if (i < 0) i = -i - 1;
        if (i >= n) i = 2 * n - i - 1;
    }
    return i;
}

std::vector<double> gaussian_kernel(int size, double sigma) {
    FFMCT_CHECK_ARG(size >= 1 && size % 2 == 1, "gaussian_kernel: size must be odd, got ", size);
    FFMCT_CHECK_ARG(sigma > 0, "gaussian_kernel: sigma must be positive");
    std::vector<double> taps(static_cast<size_t>(size));
    const int r = size / 2;
    double total = 0.0;
    for (int i = 0; i < size; ++i) {
        const double d = static_cast<double>(i - r);
        taps[static_cast<size_t>(i)] = std::exp(-0.5 * d * d / (sigma * sigma));
        total += taps[static_cast<size_t>(i)];
    }
    for (double& t : taps) t /= total;
    return taps;
}

void filter_separable(const double* src, std::int64_t height, std::int64_t width,
                      const std::vector<double>& taps, double* dst) {
    const int r = static_cast<int>(taps.size()) / 2;
    std::vector<double> tmp(static_cast<size_t>(height * width));
    for (std::int64_t y = 0; y < height; ++y) {
        const double* row = src + y * width;
        double* out = tmp.data() + y * width;
        for (std::int64_t x = 0; x < width; ++x) {
            double acc = 0.0;
            for (int k = -r; k <= r; ++k) {
                acc += taps[static_cast<size_t>(k + r)] * row[reflect_index(x + k, width)];
            }
            out[x] = acc;
        }
    }
    for (std::int64_t x = 0; x < width; ++x) {
        for (std::int64_t y = 0; y < height; ++y) {
            double acc = 0.0;
            for (int k = -r; k <= r; ++k) {
                acc += taps[static_cast<size_t>(k + r)] * tmp[reflect_index(y + k, height) * width + x];
            }
            dst[y * width + x] = acc;
        }
    }
}

void filter2d(const double* src, std::int64_t height, std::int64_t width, const double* kernel,
              int kh, int kw, double* dst) {
    FFMCT_CHECK_ARG(kh % 2 == 1 && kw % 2 == 1, "filter2d: kernel extents must be odd");
    const int rh = kh / 2, rw = kw / 2;
    for (std::int64_t y = 0; y < height; ++y) {
        for (std::int64_t x = 0; x < width; ++x) {
            double acc = 0.0;
            for (int ky = -rh; ky <= rh; ++ky) {
                const std::int64_t sy = reflect_index(y + ky, height);
                for (int kx = -rw; kx <= rw; ++kx) {
                    const std::int64_t sx = reflect_index(x + kx, width);
                    acc += kernel[(ky + rh) * kw + (kx + rw)] * src[sy * width + sx];
                }
            }
            dst[y * width + x] = acc;
        }
    }
}

void gaussian_blur(std::vector<double>& plane, std::int64_t height, std::int64_t width,
                   double sigma) {
    if (sigma <= 0.0) return;
    const int r = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
    auto taps = gaussian_kernel(2 * r + 1, sigma);
    std::vector<double> out(plane.size());
    filter_separable(plane.data(), height, width, taps, out.data());
    plane.swap(out);
}

std::vector<double> image_to_double(const ImageGrid& img) {
    return std::vector<double>(img.values.begin(), img.values.end());
}

ImageGrid double_to_image(const std::vector<double>& plane, int width, int height, bool clip) {
    FFMCT_CHECK_ARG(plane.size() == static_cast<size_t>(width) * height,
                    "double_to_image: size mismatch");
    ImageGrid img(width, height);
    for (size_t i = 0; i < plane.size(); ++i) {
        double v = plane[i];
        if (clip) v = std::min(1.0, std::max(0.0, v));
        img.values[i] = static_cast<float>(v);
    }
    return img;
}

std::vector<double> downsample2_mean(const std::vector<double>& src, std::int64_t& height,
                                     std::int64_t& width) {
    FFMCT_CHECK_ARG(height % 2 == 0 && width % 2 == 0, "downsample2_mean: extents must be even");
    const std::int64_t oh = height / 2, ow = width / 2;
    std::vector<double> dst(static_cast<size_t>(oh * ow));
    for (std::int64_t y = 0; y < oh; ++y) {
        for (std::int64_t x = 0; x < ow; ++x) {
            const double* a = src.data() + (2 * y) * width + 2 * x;
            dst[y * ow + x] = 0.25 * (a[0] + a[1] + a[width] + a[width + 1]);
        }
    }
    height = oh;
    width = ow;
    return dst;
}

}  // namespace ffmct
