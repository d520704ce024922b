#include "ffmct/ops.hpp"

#include <cmath>

#include "ffmct/fft.hpp"

namespace ffmct {
namespace {

using detail::Node;
using NodePtr = std::shared_ptr<Node>;

NodePtr make_node(Shape shape, std::vector<NodePtr> parents) {
    auto node = std::make_shared<Node>();
    node->data.assign(static_cast<size_t>(shape_numel(shape)), 0.0);
    node->shape = std::move(shape);
    node->parents = std::move(parents);
    for (const auto& p : node->parents) {
        if (p->requires_grad) node->requires_grad = true;
    }
    return node;
}

// ---- small GEMM kernels -------------------------------------------------
// Each output row is owned by exactly one thread, so results are bitwise
// deterministic for any thread count.

constexpr std::int64_t kParallelCutoff = 1 << 15;

// C[M,N] += A[M,K] * B[K,N]
void gemm_nn(std::int64_t M, std::int64_t N, std::int64_t K, const double* A, const double* B,
             double* C) {
#pragma omp parallel for schedule(static) if (M * N * K > kParallelCutoff)
    for (std::int64_t m = 0; m < M; ++m) {
        const double* a = A + m * K;
        double* c = C + m * N;
        for (std::int64_t k = 0; k < K; ++k) {
            const double av = a[k];
            const double* b = B + k * N;
            for (std::int64_t n = 0; n < N; ++n) c[n] += av * b[n];
        }
    }
}

// C[M,K] += A[M,N] * B[K,N]^T
void gemm_nt(std::int64_t M, std::int64_t K, std::int64_t N, const double* A, const double* B,
             double* C) {
#pragma omp parallel for schedule(static) if (M * N * K > kParallelCutoff)
    for (std::int64_t m = 0; m < M; ++m) {
        const double* a = A + m * N;
        double* c = C + m * K;
        for (std::int64_t k = 0; k < K; ++k) {
            const double* b = B + k * N;
            double acc = 0.0;
            for (std::int64_t n = 0; n < N; ++n) acc += a[n] * b[n];
            c[k] += acc;
        }
    }
}

// C[K,N] += A[M,K]^T * B[M,N]
void gemm_tn(std::int64_t K, std::int64_t N, std::int64_t M, const double* A, const double* B,
             double* C) {
#pragma omp parallel for schedule(static) if (M * N * K > kParallelCutoff)
    for (std::int64_t k = 0; k < K; ++k) {
        double* c = C + k * N;
        for (std::int64_t m = 0; m < M; ++m) {
            const double av = A[m * K + k];
            const double* b = B + m * N;
            for (std::int64_t n = 0; n < N; ++n) c[n] += av * b[n];
        }
    }
}

// ---- conv2d lowering ----------------------------------------------------

// keeps the phase gradient finite at |f| = 0
constexpr double kMagFloor = 1e-12;

struct ConvDims {
    std::int64_t B, Ci, H, W, Co, KH, KW, OH, OW, stride, pad;
    std::int64_t col_rows() const { return Ci * KH * KW; }
    std::int64_t col_cols() const { return OH * OW; }
};

void im2col(const double* x, const ConvDims& d, double* col) {
    for (std::int64_t ci = 0; ci < d.Ci; ++ci) {
        const double* plane = x + ci * d.H * d.W;
        for (std::int64_t kh = 0; kh < d.KH; ++kh) {
            for (std::int64_t kw = 0; kw < d.KW; ++kw) {
                double* row = col + ((ci * d.KH + kh) * d.KW + kw) * d.col_cols();
                for (std::int64_t oh = 0; oh < d.OH; ++oh) {
                    const std::int64_t ih = oh * d.stride - d.pad + kh;
                    double* out = row + oh * d.OW;
                    if (ih < 0 || ih >= d.H) {
                        for (std::int64_t ow = 0; ow < d.OW; ++ow) out[ow] = 0.0;
                        continue;
                    }
                    const double* in = plane + ih * d.W;
                    for (std::int64_t ow = 0; ow < d.OW; ++ow) {
                        const std::int64_t iw = ow * d.stride - d.pad + kw;
                        out[ow] = (iw >= 0 && iw < d.W) ? in[iw] : 0.0;
                    }
                }
            }
        }
    }
}

void col2im_acc(const double* col, const ConvDims& d, double* x_grad) {
    for (std::int64_t ci = 0; ci < d.Ci; ++ci) {
        double* plane = x_grad + ci * d.H * d.W;
        for (std::int64_t kh = 0; kh < d.KH; ++kh) {
            for (std::int64_t kw = 0; kw < d.KW; ++kw) {
                const double* row = col + ((ci * d.KH + kh) * d.KW + kw) * d.col_cols();
                for (std::int64_t oh = 0; oh < d.OH; ++oh) {
                    const std::int64_t ih = oh * d.stride - d.pad + kh;
                    if (ih < 0 || ih >= d.H) continue;
                    const double* in = row + oh * d.OW;
                    double* out = plane + ih * d.W;
                    for (std::int64_t ow = 0; ow < d.OW; ++ow) {
                        const std::int64_t iw = ow * d.stride - d.pad + kw;
                        if (iw >= 0 && iw < d.W) out[iw] += in[ow];
                    }
                }
            }
        }
    }
}

void check_4d(const Tensor& t, const char* what) {
    FFMCT_CHECK_ARG(t.defined() && t.shape().size() == 4, what, " must be a 4-D tensor");
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
    FFMCT_CHECK_ARG(a.defined() && b.defined(), "add: undefined tensor");
    FFMCT_CHECK_ARG(a.shape() == b.shape(), "add: shape mismatch ", shape_str(a.shape()), " vs ",
                    shape_str(b.shape()));
    auto an = a.node(), bn = b.node();
    auto out = make_node(a.shape(), {an, bn});
    const std::int64_t n = out->numel();
    for (std::int64_t i = 0; i < n; ++i) out->data[i] = an->data[i] + bn->data[i];
    if (out->requires_grad) {
        out->backward_fn = [an, bn, n](Node& self) {
            if (an->requires_grad) {
                an->ensure_grad();
                for (std::int64_t i = 0; i < n; ++i) an->grad[i] += self.grad[i];
            }
            if (bn->requires_grad) {
                bn->ensure_grad();
                for (std::int64_t i = 0; i < n; ++i) bn->grad[i] += self.grad[i];
            }
        };
    }
    return Tensor::wrap(out);
}

Tensor mul_scalar(const Tensor& x, double s) {
    FFMCT_CHECK_ARG(x.defined(), "mul_scalar: undefined tensor");
    FFMCT_CHECK_ARG(std::isfinite(s), "mul_scalar: non-finite scalar");
    auto xn = x.node();
    auto out = make_node(x.shape(), {xn});
    const std::int64_t n = out->numel();
    for (std::int64_t i = 0; i < n; ++i) out->data[i] = xn->data[i] * s;
    if (out->requires_grad) {
        out->backward_fn = [xn, s, n](Node& self) {
            xn->ensure_grad();
            for (std::int64_t i = 0; i < n; ++i) xn->grad[i] += self.grad[i] * s;
        };
    }
    return Tensor::wrap(out);
}

Tensor silu(const Tensor& x) {
    FFMCT_CHECK_ARG(x.defined(), "silu: undefined tensor");
    auto xn = x.node();
    auto out = make_node(x.shape(), {xn});
    const std::int64_t n = out->numel();
    for (std::int64_t i = 0; i < n; ++i) {
        const double v = xn->data[i];
        out->data[i] = v / (1.0 + std::exp(-v));
    }
    if (out->requires_grad) {
        out->backward_fn = [xn, n](Node& self) {
            xn->ensure_grad();
            for (std::int64_t i = 0; i < n; ++i) {
                const double v = xn->data[i];
                const double sig = 1.0 / (1.0 + std::exp(-v));
                xn->grad[i] += self.grad[i] * sig * (1.0 + v * (1.0 - sig));
            }
        };
    }
    return Tensor::wrap(out);
}

Tensor sum(const Tensor& x) {
    FFMCT_CHECK_ARG(x.defined(), "sum: undefined tensor");
    auto xn = x.node();
    auto out = make_node(Shape{1}, {xn});
    double acc = 0.0;
    for (double v : xn->data) acc += v;
    out->data[0] = acc;
    if (out->requires_grad) {
        const std::int64_t n = xn->numel();
        out->backward_fn = [xn, n](Node& self) {
            xn->ensure_grad();
            const double g = self.grad[0];
            for (std::int64_t i = 0; i < n; ++i) xn->grad[i] += g;
        };
    }
    return Tensor::wrap(out);
}

Tensor mse_loss(const Tensor& pred, const Tensor& target) {
    FFMCT_CHECK_ARG(pred.defined() && target.defined(), "mse_loss: undefined tensor");
    FFMCT_CHECK_ARG(pred.shape() == target.shape(), "mse_loss: shape mismatch ",
                    shape_str(pred.shape()), " vs ", shape_str(target.shape()));
    auto pn = pred.node(), tn = target.node();
    auto out = make_node(Shape{1}, {pn, tn});
    const std::int64_t n = pn->numel();
    double acc = 0.0;
    for (std::int64_t i = 0; i < n; ++i) {
        const double d = pn->data[i] - tn->data[i];
        acc += d * d;
    }
    out->data[0] = acc / static_cast<double>(n);
    if (out->requires_grad) {
        out->backward_fn = [pn, tn, n](Node& self) {
            const double g = self.grad[0] * 2.0 / static_cast<double>(n);
            if (pn->requires_grad) {
                pn->ensure_grad();
                for (std::int64_t i = 0; i < n; ++i)
                    pn->grad[i] += g * (pn->data[i] - tn->data[i]);
            }
            if (tn->requires_grad) {
                tn->ensure_grad();
                for (std::int64_t i = 0; i < n; ++i)
                    tn->grad[i] -= g * (pn->data[i] - tn->data[i]);
            }
        };
    }
    return Tensor::wrap(out);
}

Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias) {
    FFMCT_CHECK_ARG(x.defined() && weight.defined() && bias.defined(), "linear: undefined tensor");
    FFMCT_CHECK_ARG(x.shape().size() == 2 && weight.shape().size() == 2 &&
                        bias.shape().size() == 1,
                    "linear: expected x:[B,In] weight:[Out,In] bias:[Out]");
    const std::int64_t B = x.shape()[0], In = x.shape()[1];
    const std::int64_t Out = weight.shape()[0];
    FFMCT_CHECK_ARG(weight.shape()[1] == In && bias.shape()[0] == Out,
                    "linear: dimension mismatch x:", shape_str(x.shape()),
                    " weight:", shape_str(weight.shape()), " bias:", shape_str(bias.shape()));
    auto xn = x.node(), wn = weight.node(), bn = bias.node();
    auto out = make_node(Shape{B, Out}, {xn, wn, bn});
    for (std::int64_t b = 0; b < B; ++b)
        for (std::int64_t o = 0; o < Out; ++o) out->data[b * Out + o] = bn->data[o];
    gemm_nt(B, Out, In, xn->data.data(), wn->data.data(), out->data.data());
    if (out->requires_grad) {
        out->backward_fn = [xn, wn, bn, B, In, Out](Node& self) {
            const double* gy = self.grad.data();
            if (xn->requires_grad) {
                xn->ensure_grad();
                gemm_nn(B, In, Out, gy, wn->data.data(), xn->grad.data());
            }
            if (wn->requires_grad) {
                wn->ensure_grad();
                gemm_tn(Out, In, B, gy, xn->data.data(), wn->grad.data());
            }
            if (bn->requires_grad) {
                bn->ensure_grad();
                for (std::int64_t b = 0; b < B; ++b)
                    for (std::int64_t o = 0; o < Out; ++o) bn->grad[o] += gy[b * Out + o];
            }
        };
    }
    return Tensor::wrap(out);
}

Tensor add_channel_bias(const Tensor& x, const Tensor& bias) {
    check_4d(x, "add_channel_bias: x");
    FFMCT_CHECK_ARG(bias.defined() && bias.shape().size() == 2, "add_channel_bias: bias must be [B,C]");
    const std::int64_t B = x.shape()[0], C = x.shape()[1], HW = x.shape()[2] * x.shape()[3];
    FFMCT_CHECK_ARG(bias.shape()[0] == B && bias.shape()[1] == C,
                    "add_channel_bias: bias shape ", shape_str(bias.shape()),
                    " does not match x ", shape_str(x.shape()));
    auto xn = x.node(), bn = bias.node();
    auto out = make_node(x.shape(), {xn, bn});
    for (std::int64_t b = 0; b < B; ++b) {
        for (std::int64_t c = 0; c < C; ++c) {
            const double off = bn->data[b * C + c];
            const double* in = xn->data.data() + (b * C + c) * HW;
            double* o = out->data.data() + (b * C + c) * HW;
            for (std::int64_t i = 0; i < HW; ++i) o[i] = in[i] + off;
        }
    }
    if (out->requires_grad) {
        out->backward_fn = [xn, bn, B, C, HW](Node& self) {
            if (xn->requires_grad) {
                xn->ensure_grad();
                const std::int64_t n = self.numel();
                for (std::int64_t i = 0; i < n; ++i) xn->grad[i] += self.grad[i];
            }
            if (bn->requires_grad) {
                bn->ensure_grad();
                for (std::int64_t b = 0; b < B; ++b) {
                    for (std::int64_t c = 0; c < C; ++c) {
                        const double* g = self.grad.data() + (b * C + c) * HW;
                        double acc = 0.0;
                        for (std::int64_t i = 0; i < HW; ++i) acc += g[i];
                        bn->grad[b * C + c] += acc;
                    }
                }
            }
        };
    }
    return Tensor::wrap(out);
}

Tensor concat_channels(const Tensor& a, const Tensor& b) {
    check_4d(a, "concat_channels: a");
    check_4d(b, "concat_channels: b");
    const auto& sa = a.shape();
    const auto& sb = b.shape();
    FFMCT_CHECK_ARG(sa[0] == sb[0] && sa[2] == sb[2] && sa[3] == sb[3],
                    "concat_channels: incompatible shapes ", shape_str(sa), " vs ", shape_str(sb));
    const std::int64_t B = sa[0], Ca = sa[1], Cb = sb[1], HW = sa[2] * sa[3];
    auto an = a.node(), bn = b.node();
    auto out = make_node(Shape{B, Ca + Cb, sa[2], sa[3]}, {an, bn});
    for (std::int64_t bi = 0; bi < B; ++bi) {
        double* dst = out->data.data() + bi * (Ca + Cb) * HW;
        const double* pa = an->data.data() + bi * Ca * HW;
        const double* pb = bn->data.data() + bi * Cb * HW;
        std::copy(pa, pa + Ca * HW, dst);
        std::copy(pb, pb + Cb * HW, dst + Ca * HW);
    }
    if (out->requires_grad) {
        out->backward_fn = [an, bn, B, Ca, Cb, HW](Node& self) {
            for (std::int64_t bi = 0; bi < B; ++bi) {
                const double* g = self.grad.data() + bi * (Ca + Cb) * HW;
                if (an->requires_grad) {
                    an->ensure_grad();
                    double* ga = an->grad.data() + bi * Ca * HW;
                    for (std::int64_t i = 0; i < Ca * HW; ++i) ga[i] += g[i];
                }
                if (bn->requires_grad) {
                    bn->ensure_grad();
                    double* gb = bn->grad.data() + bi * Cb * HW;
                    for (std::int64_t i = 0; i < Cb * HW; ++i) gb[i] += g[Ca * HW + i];
                }
            }
        };
    }
    return Tensor::wrap(out);
}

Tensor upsample_nearest2(const Tensor& x) {
    check_4d(x, "upsample_nearest2: x");
    const std::int64_t B = x.shape()[0], C = x.shape()[1], H = x.shape()[2], W = x.shape()[3];
    auto xn = x.node();
    auto out = make_node(Shape{B, C, 2 * H, 2 * W}, {xn});
    for (std::int64_t bc = 0; bc < B * C; ++bc) {
        const double* in = xn->data.data() + bc * H * W;
        double* o = out->data.data() + bc * 4 * H * W;
        for (std::int64_t h = 0; h < H; ++h) {
            for (std::int64_t w = 0; w < W; ++w) {
                const double v = in[h * W + w];
                double* base = o + (2 * h) * (2 * W) + 2 * w;
                base[0] = v;
                base[1] = v;
                base[2 * W] = v;
                base[2 * W + 1] = v;
            }
        }
    }
    if (out->requires_grad) {
        out->backward_fn = [xn, B, C, H, W](Node& self) {
            xn->ensure_grad();
            for (std::int64_t bc = 0; bc < B * C; ++bc) {
                double* gi = xn->grad.data() + bc * H * W;
                const double* go = self.grad.data() + bc * 4 * H * W;
                for (std::int64_t h = 0; h < H; ++h) {
                    for (std::int64_t w = 0; w < W; ++w) {
                        const double* base = go + (2 * h) * (2 * W) + 2 * w;
                        gi[h * W + w] += base[0] + base[1] + base[2 * W] + base[2 * W + 1];
                    }
                }
            }
        };
    }
    return Tensor::wrap(out);
}

Tensor conv2d(const Tensor& x, const Tensor& weight, const Tensor& bias, int stride, int padding) {
    check_4d(x, "conv2d: x");
    check_4d(weight, "conv2d: weight");
    FFMCT_CHECK_ARG(bias.defined() && bias.shape().size() == 1, "conv2d: bias must be 1-D");
    FFMCT_CHECK_ARG(stride >= 1 && padding >= 0, "conv2d: invalid stride/padding");
    ConvDims d{};
    d.B = x.shape()[0];
    d.Ci = x.shape()[1];
    d.H = x.shape()[2];
    d.W = x.shape()[3];
    d.Co = weight.shape()[0];
    d.KH = weight.shape()[2];
    d.KW = weight.shape()[3];
    d.stride = stride;
    d.pad = padding;
    FFMCT_CHECK_ARG(weight.shape()[1] == d.Ci, "conv2d: channel mismatch, x has ", d.Ci,
                    " input channels but weight expects ", weight.shape()[1]);
    FFMCT_CHECK_ARG(bias.shape()[0] == d.Co, "conv2d: bias length ", bias.shape()[0],
                    " != output channels ", d.Co);
    FFMCT_CHECK_ARG(d.KH % 2 == 1 && d.KW % 2 == 1, "conv2d: kernel extents must be odd, got ",
                    d.KH, "x", d.KW);
    d.OH = (d.H + 2 * d.pad - d.KH) / d.stride + 1;
    d.OW = (d.W + 2 * d.pad - d.KW) / d.stride + 1;
    FFMCT_CHECK_ARG(d.H + 2 * d.pad >= d.KH && d.W + 2 * d.pad >= d.KW && d.OH >= 1 && d.OW >= 1,
                    "conv2d: kernel ", d.KH, "x", d.KW, " does not fit input ", d.H, "x", d.W,
                    " with padding ", d.pad);

    auto xn = x.node(), wn = weight.node(), bn = bias.node();
    auto out = make_node(Shape{d.B, d.Co, d.OH, d.OW}, {xn, wn, bn});

    const std::int64_t K = d.col_rows(), N = d.col_cols();
    std::vector<double> col(static_cast<size_t>(K * N));
    for (std::int64_t b = 0; b < d.B; ++b) {
        im2col(xn->data.data() + b * d.Ci * d.H * d.W, d, col.data());
        double* y = out->data.data() + b * d.Co * N;
        for (std::int64_t co = 0; co < d.Co; ++co) {
            const double bv = bn->data[co];
            for (std::int64_t n = 0; n < N; ++n) y[co * N + n] = bv;
        }
        gemm_nn(d.Co, N, K, wn->data.data(), col.data(), y);
    }

    if (out->requires_grad) {
        out->backward_fn = [xn, wn, bn, d, K, N](Node& self) {
            std::vector<double> col(static_cast<size_t>(K * N));
            std::vector<double> dcol;
            if (xn->requires_grad) dcol.assign(static_cast<size_t>(K * N), 0.0);
            if (xn->requires_grad) xn->ensure_grad();
            if (wn->requires_grad) wn->ensure_grad();
            if (bn->requires_grad) bn->ensure_grad();
            for (std::int64_t b = 0; b < d.B; ++b) {
                const double* gy = self.grad.data() + b * d.Co * N;
                if (wn->requires_grad || xn->requires_grad) {
                    im2col(xn->data.data() + b * d.Ci * d.H * d.W, d, col.data());
                }
                if (wn->requires_grad) {
                    gemm_nt(d.Co, K, N, gy, col.data(), wn->grad.data());
                }
                if (bn->requires_grad) {
                    for (std::int64_t co = 0; co < d.Co; ++co) {
                        double acc = 0.0;
                        const double* g = gy + co * N;
                        for (std::int64_t n = 0; n < N; ++n) acc += g[n];
                        bn->grad[co] += acc;
                    }
                }
                if (xn->requires_grad) {
                    std::fill(dcol.begin(), dcol.end(), 0.0);
                    gemm_tn(K, N, d.Co, wn->data.data(), gy, dcol.data());
                    col2im_acc(dcol.data(), d, xn->grad.data() + b * d.Ci * d.H * d.W);
                }
            }
        };
    }
    return Tensor::wrap(out);
}

Tensor conv1x1(const Tensor& x, const Tensor& weight) {
    check_4d(x, "conv1x1: x");
    check_4d(weight, "conv1x1: weight");
    FFMCT_CHECK_ARG(weight.shape()[2] == 1 && weight.shape()[3] == 1,
                    "conv1x1: weight must be [Co,Ci,1,1], got ", shape_str(weight.shape()));
    const std::int64_t B = x.shape()[0], Ci = x.shape()[1], HW = x.shape()[2] * x.shape()[3];
    const std::int64_t Co = weight.shape()[0];
    FFMCT_CHECK_ARG(weight.shape()[1] == Ci, "conv1x1: channel mismatch, x has ", Ci,
                    " channels but weight expects ", weight.shape()[1]);
    auto xn = x.node(), wn = weight.node();
    auto out = make_node(Shape{B, Co, x.shape()[2], x.shape()[3]}, {xn, wn});
    for (std::int64_t b = 0; b < B; ++b) {
        gemm_nn(Co, HW, Ci, wn->data.data(), xn->data.data() + b * Ci * HW,
                out->data.data() + b * Co * HW);
    }
    if (out->requires_grad) {
        out->backward_fn = [xn, wn, B, Ci, Co, HW](Node& self) {
            if (xn->requires_grad) xn->ensure_grad();
            if (wn->requires_grad) wn->ensure_grad();
            for (std::int64_t b = 0; b < B; ++b) {
                const double* gy = self.grad.data() + b * Co * HW;
                if (wn->requires_grad) {
                    gemm_nt(Co, Ci, HW, gy, xn->data.data() + b * Ci * HW, wn->grad.data());
                }
                if (xn->requires_grad) {
                    gemm_tn(Ci, HW, Co, wn->data.data(), gy, xn->grad.data() + b * Ci * HW);
                }
            }
        };
    }
    return Tensor::wrap(out);
}

// ---- frequency-domain ops ------------------------------------------------

namespace {

void check_fft_input(const Tensor& x) {
    check_4d(x, "fft2: x");
    FFMCT_CHECK_ARG(is_power_of_two(x.shape()[2]) && is_power_of_two(x.shape()[3]),
                    "fft2/ifft2 require power-of-two extents, got ", x.shape()[2], "x",
                    x.shape()[3]);
}

// Forward unitary transform of a real plane; writes both output parts.
void fft_of_real(const double* src, std::int64_t h, std::int64_t w, std::vector<double>& re,
                 std::vector<double>& im) {
    re.assign(src, src + h * w);
    im.assign(static_cast<size_t>(h * w), 0.0);
    fft2_plane_inplace(re, im, h, w, /*inverse=*/false);
}

}  // namespace

ComplexField fft2(const Tensor& x) {
    check_fft_input(x);
    const std::int64_t B = x.shape()[0], C = x.shape()[1], H = x.shape()[2], W = x.shape()[3];
    const std::int64_t plane = H * W;
    auto xn = x.node();
    auto re = make_node(x.shape(), {xn});
    auto im = make_node(x.shape(), {xn});
    std::vector<double> br, bi;
    for (std::int64_t p = 0; p < B * C; ++p) {
        fft_of_real(xn->data.data() + p * plane, H, W, br, bi);
        std::copy(br.begin(), br.end(), re->data.begin() + p * plane);
        std::copy(bi.begin(), bi.end(), im->data.begin() + p * plane);
    }
    if (re->requires_grad) {
        // d/dx of the real part: Re(F g); of the imaginary part: Im(F g).
        re->backward_fn = [xn, B, C, H, W, plane](Node& self) {
            xn->ensure_grad();
            std::vector<double> br, bi;
            for (std::int64_t p = 0; p < B * C; ++p) {
                fft_of_real(self.grad.data() + p * plane, H, W, br, bi);
                double* g = xn->grad.data() + p * plane;
                for (std::int64_t i = 0; i < plane; ++i) g[i] += br[i];
            }
        };
        im->backward_fn = [xn, B, C, H, W, plane](Node& self) {
            xn->ensure_grad();
            std::vector<double> br, bi;
            for (std::int64_t p = 0; p < B * C; ++p) {
                fft_of_real(self.grad.data() + p * plane, H, W, br, bi);
                double* g = xn->grad.data() + p * plane;
                for (std::int64_t i = 0; i < plane; ++i) g[i] += bi[i];
            }
        };
    }
    return ComplexField{Tensor::wrap(re), Tensor::wrap(im)};
}

Tensor ifft2(const ComplexField& f, double* imag_residue_l2) {
    FFMCT_CHECK_ARG(f.real.defined() && f.imag.defined(), "ifft2: undefined field");
    FFMCT_CHECK_ARG(f.real.shape() == f.imag.shape(), "ifft2: real/imag shape mismatch");
    check_fft_input(f.real);
    const std::int64_t B = f.real.shape()[0], C = f.real.shape()[1];
    const std::int64_t H = f.real.shape()[2], W = f.real.shape()[3];
    const std::int64_t plane = H * W;
    auto rn = f.real.node(), in = f.imag.node();
    auto out = make_node(f.real.shape(), {rn, in});
    double residue = 0.0;
    std::vector<double> br(static_cast<size_t>(plane)), bi(static_cast<size_t>(plane));
    for (std::int64_t p = 0; p < B * C; ++p) {
        std::copy(rn->data.begin() + p * plane, rn->data.begin() + (p + 1) * plane, br.begin());
        std::copy(in->data.begin() + p * plane, in->data.begin() + (p + 1) * plane, bi.begin());
        fft2_plane_inplace(br, bi, H, W, /*inverse=*/true);
        std::copy(br.begin(), br.end(), out->data.begin() + p * plane);
        for (double v : bi) residue += v * v;
    }
    if (imag_residue_l2) *imag_residue_l2 = std::sqrt(residue);
    if (out->requires_grad) {
        out->backward_fn = [rn, in, B, C, H, W, plane](Node& self) {
            std::vector<double> br, bi;
            for (std::int64_t p = 0; p < B * C; ++p) {
                fft_of_real(self.grad.data() + p * plane, H, W, br, bi);
                if (rn->requires_grad) {
                    rn->ensure_grad();
                    double* g = rn->grad.data() + p * plane;
                    for (std::int64_t i = 0; i < plane; ++i) g[i] += br[i];
                }
                if (in->requires_grad) {
                    in->ensure_grad();
                    double* g = in->grad.data() + p * plane;
                    for (std::int64_t i = 0; i < plane; ++i) g[i] += bi[i];
                }
            }
        };
    }
    return Tensor::wrap(out);
}

PolarParts polar(const ComplexField& f) {
    FFMCT_CHECK_ARG(f.real.defined() && f.imag.defined(), "polar: undefined field");
    FFMCT_CHECK_ARG(f.real.shape() == f.imag.shape(), "polar: real/imag shape mismatch");
    auto rn = f.real.node(), in = f.imag.node();
    auto mag = make_node(f.real.shape(), {rn, in});
    auto ph = make_node(f.real.shape(), {rn, in});
    const std::int64_t n = mag->numel();
    for (std::int64_t i = 0; i < n; ++i) {
        mag->data[i] = std::hypot(rn->data[i], in->data[i]);
        ph->data[i] = std::atan2(in->data[i], rn->data[i]);
    }
    if (mag->requires_grad) {
        auto mn = mag;
        mag->backward_fn = [rn, in, mn, n](Node& self) {
            if (rn->requires_grad) rn->ensure_grad();
            if (in->requires_grad) in->ensure_grad();
            for (std::int64_t i = 0; i < n; ++i) {
                const double m = std::max(mn->data[i], kMagFloor);
                if (rn->requires_grad) rn->grad[i] += self.grad[i] * rn->data[i] / m;
                if (in->requires_grad) in->grad[i] += self.grad[i] * in->data[i] / m;
            }
        };
        auto magn = mag;
        ph->backward_fn = [rn, in, magn, n](Node& self) {
            if (rn->requires_grad) rn->ensure_grad();
            if (in->requires_grad) in->ensure_grad();
            for (std::int64_t i = 0; i < n; ++i) {
                const double m = std::max(magn->data[i], kMagFloor);
                const double m2 = m * m;
                if (rn->requires_grad) rn->grad[i] -= self.grad[i] * in->data[i] / m2;
                if (in->requires_grad) in->grad[i] += self.grad[i] * rn->data[i] / m2;
            }
        };
    }
    return PolarParts{Tensor::wrap(mag), Tensor::wrap(ph)};
}

ComplexField unpolar(const Tensor& magnitude, const Tensor& phase) {
    FFMCT_CHECK_ARG(magnitude.defined() && phase.defined(), "unpolar: undefined tensor");
    FFMCT_CHECK_ARG(magnitude.shape() == phase.shape(), "unpolar: shape mismatch");
    auto mn = magnitude.node(), pn = phase.node();
    auto re = make_node(magnitude.shape(), {mn, pn});
    auto im = make_node(magnitude.shape(), {mn, pn});
    const std::int64_t n = re->numel();
    for (std::int64_t i = 0; i < n; ++i) {
        re->data[i] = mn->data[i] * std::cos(pn->data[i]);
        im->data[i] = mn->data[i] * std::sin(pn->data[i]);
    }
    if (re->requires_grad) {
        re->backward_fn = [mn, pn, n](Node& self) {
            if (mn->requires_grad) mn->ensure_grad();
            if (pn->requires_grad) pn->ensure_grad();
            for (std::int64_t i = 0; i < n; ++i) {
                const double c = std::cos(pn->data[i]), s = std::sin(pn->data[i]);
                if (mn->requires_grad) mn->grad[i] += self.grad[i] * c;
                if (pn->requires_grad) pn->grad[i] -= self.grad[i] * mn->data[i] * s;
            }
        };
        im->backward_fn = [mn, pn, n](Node& self) {
            if (mn->requires_grad) mn->ensure_grad();
            if (pn->requires_grad) pn->ensure_grad();
            for (std::int64_t i = 0; i < n; ++i) {
                const double c = std::cos(pn->data[i]), s = std::sin(pn->data[i]);
                if (mn->requires_grad) mn->grad[i] += self.grad[i] * s;
                if (pn->requires_grad) pn->grad[i] += self.grad[i] * mn->data[i] * c;
            }
        };
    }
    return ComplexField{Tensor::wrap(re), Tensor::wrap(im)};
}

}  // namespace ffmct
