#pragma once

#include <cstdint>
#include <span>

namespace ffmct {

constexpr bool is_power_of_two(std::int64_t n) { return n > 0 && (n & (n - 1)) == 0; }

// In-place 2-D FFT of one H x W plane held as split real/imag buffers,
// unitary convention (1/sqrt(H*W) in both directions). Radix-2 only;
// extents must be powers of two.
void fft2_plane_inplace(std::span<double> re, std::span<double> im, std::int64_t height,
                        std::int64_t width, bool inverse);

}  // namespace ffmct
