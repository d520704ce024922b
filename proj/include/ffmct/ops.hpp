#pragma once

#include "ffmct/tensor.hpp"

namespace ffmct {

// Frequency-domain intermediate: produced by fft2, consumed by ifft2 or polar.
struct ComplexField {
    Tensor real;
    Tensor imag;
};

struct PolarParts {
    Tensor magnitude;
    Tensor phase;
};

Tensor add(const Tensor& a, const Tensor& b);
Tensor mul_scalar(const Tensor& x, double s);
Tensor silu(const Tensor& x);
Tensor sum(const Tensor& x);

// Mean squared error; gradient w.r.t. pred is 2*(pred-target)/N.
Tensor mse_loss(const Tensor& pred, const Tensor& target);

// x:[B,In] weight:[Out,In] bias:[Out] -> [B,Out]
Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias);

// x:[B,C,H,W] bias:[B,C] -> per-channel offset per batch element
Tensor add_channel_bias(const Tensor& x, const Tensor& bias);

Tensor concat_channels(const Tensor& a, const Tensor& b);
Tensor upsample_nearest2(const Tensor& x);

// Cross-correlation, zero padding. weight:[Co,Ci,kh,kw] with odd kh,kw.
Tensor conv2d(const Tensor& x, const Tensor& weight, const Tensor& bias, int stride = 1,
              int padding = 0);

// Per-pixel linear map over channels. weight:[Co,Ci,1,1], no bias.
Tensor conv1x1(const Tensor& x, const Tensor& weight);

// Unitary 2-D FFT over the [H,W] planes of x:[B,C,H,W]; power-of-two extents.
ComplexField fft2(const Tensor& x);

// Inverse transform; returns the real part. The imaginary residue (L2 norm of
// the discarded part) is reported through `imag_residue_l2` when non-null.
Tensor ifft2(const ComplexField& f, double* imag_residue_l2 = nullptr);

// Magnitude/phase decomposition; the phase gradient clamps |f| to >= 1e-12.
PolarParts polar(const ComplexField& f);
ComplexField unpolar(const Tensor& magnitude, const Tensor& phase);

}  // namespace ffmct
