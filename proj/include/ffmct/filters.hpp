#pragma once

#include <cstdint>
#include <vector>

#include "ffmct/image.hpp"

namespace ffmct {

// Shared windowed-filter plumbing. All filters use symmetric (edge-inclusive)
// padding: index -1 maps to 0, -2 to 1, n maps to n-1, and so on.
std::int64_t reflect_index(std::int64_t i, std::int64_t n);

// Normalized 1-D Gaussian taps.
std::vector<double> gaussian_kernel(int size, double sigma);

// Separable filtering with one 1-D kernel applied along both axes.
void filter_separable(const double* src, std::int64_t height, std::int64_t width,
                      const std::vector<double>& taps, double* dst);

// Dense 2-D correlation with a kh x kw kernel (odd extents).
void filter2d(const double* src, std::int64_t height, std::int64_t width, const double* kernel,
              int kh, int kw, double* dst);

void gaussian_blur(std::vector<double>& plane, std::int64_t height, std::int64_t width,
                   double sigma);

std::vector<double> image_to_double(const ImageGrid& img);
ImageGrid double_to_image(const std::vector<double>& plane, int width, int height,
                          bool clip = true);

// Downsample by 2 with 2x2 average pooling (even extents required).
std::vector<double> downsample2_mean(const std::vector<double>& src, std::int64_t& height,
                                     std::int64_t& width);

}  // namespace ffmct
