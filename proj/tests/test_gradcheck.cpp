#include <cmath>
#include <functional>
#include <vector>

#include "doctest.h"
#include "ffmct/ops.hpp"
#include "ffmct/rng.hpp"

using namespace ffmct;

namespace {

struct InputSpec {
    Shape shape;
    double lo = -1.0;
    double hi = 1.0;
};

using Builder = std::function<Tensor(const std::vector<Tensor>&)>;

// Central finite differences (h = 1e-5, double precision) against the tape.
// Loss is mse against a fixed random target so upstream gradients are
// non-constant.
void gradcheck(const char* name, const Builder& fn, const std::vector<InputSpec>& specs,
               std::uint64_t seed, double tol = 1e-3) {
    INFO("op: " << name);
    Rng rng(seed);
    std::vector<std::vector<double>> values;
    for (const auto& s : specs) {
        std::vector<double> v(static_cast<size_t>(shape_numel(s.shape)));
        for (auto& x : v) x = rng.uniform(s.lo, s.hi);
        values.push_back(std::move(v));
    }

    auto make_inputs = [&](bool requires_grad) {
        std::vector<Tensor> ts;
        for (size_t i = 0; i < specs.size(); ++i)
            ts.push_back(Tensor::from_data(specs[i].shape, values[i], requires_grad));
        return ts;
    };

    // fixed target from a first forward pass
    std::vector<double> target;
    {
        Tensor y = fn(make_inputs(false));
        target.resize(static_cast<size_t>(y.numel()));
        Rng trng(seed ^ 0xbeef);
        for (auto& t : target) t = trng.uniform(-1.0, 1.0);
    }
    auto loss_of = [&](const std::vector<Tensor>& inputs) {
        Tensor y = fn(inputs);
        Tensor t = Tensor::from_data(y.shape(), target, false);
        return mse_loss(y, t);
    };

    auto inputs = make_inputs(true);
    Tensor loss = loss_of(inputs);
    backward(loss);

    const double h = 1e-5;
    for (size_t i = 0; i < specs.size(); ++i) {
        auto analytic = inputs[i].grad();
        for (size_t j = 0; j < values[i].size(); ++j) {
            const double save = values[i][j];
            values[i][j] = save + h;
            const double lp = loss_of(make_inputs(false)).item();
            values[i][j] = save - h;
            const double lm = loss_of(make_inputs(false)).item();
            values[i][j] = save;
            const double numeric = (lp - lm) / (2.0 * h);
            const double denom = std::max({1e-3, std::abs(analytic[j]), std::abs(numeric)});
            INFO("input " << i << " elem " << j << " analytic " << analytic[j] << " numeric "
                          << numeric);
            CHECK(std::abs(analytic[j] - numeric) / denom < tol);
        }
    }
}

}  // namespace

TEST_CASE("gradcheck: elementwise and shape ops") {
    gradcheck("silu", [](const std::vector<Tensor>& in) { return silu(in[0]); },
              {{{1, 2, 4, 4}}}, 101);
    gradcheck("add", [](const std::vector<Tensor>& in) { return add(in[0], in[1]); },
              {{{2, 3}}, {{2, 3}}}, 102);
    gradcheck("mul_scalar", [](const std::vector<Tensor>& in) { return mul_scalar(in[0], -0.7); },
              {{{3, 3}}}, 103);
    gradcheck("upsample_nearest2",
              [](const std::vector<Tensor>& in) { return upsample_nearest2(in[0]); },
              {{{1, 2, 3, 3}}}, 104);
    gradcheck("concat_channels",
              [](const std::vector<Tensor>& in) { return concat_channels(in[0], in[1]); },
              {{{1, 2, 3, 3}}, {{1, 1, 3, 3}}}, 105);
    gradcheck("mse", [](const std::vector<Tensor>& in) { return mse_loss(in[0], in[1]); },
              {{{2, 4}}, {{2, 4}}}, 106);
}

TEST_CASE("gradcheck: linear and bias") {
    gradcheck("linear",
              [](const std::vector<Tensor>& in) { return linear(in[0], in[1], in[2]); },
              {{{3, 4}}, {{2, 4}}, {{2}}}, 111);
    gradcheck("add_channel_bias",
              [](const std::vector<Tensor>& in) { return add_channel_bias(in[0], in[1]); },
              {{{2, 3, 4, 4}}, {{2, 3}}}, 112);
}

TEST_CASE("gradcheck: convolutions") {
    gradcheck("conv2d s1 p1",
              [](const std::vector<Tensor>& in) { return conv2d(in[0], in[1], in[2], 1, 1); },
              {{{1, 2, 5, 5}}, {{2, 2, 3, 3}}, {{2}}}, 121);
    gradcheck("conv2d s2 p1",
              [](const std::vector<Tensor>& in) { return conv2d(in[0], in[1], in[2], 2, 1); },
              {{{1, 1, 6, 6}}, {{2, 1, 3, 3}}, {{2}}}, 122);
    gradcheck("conv1x1",
              [](const std::vector<Tensor>& in) { return conv1x1(in[0], in[1]); },
              {{{1, 3, 4, 4}}, {{2, 3, 1, 1}}}, 123);
}

TEST_CASE("gradcheck: conv2d + mse composite matches finite differences") {
    // the spec's named example: loss = mse(conv2d(x,w), y)
    gradcheck("conv2d into mse",
              [](const std::vector<Tensor>& in) {
                  return conv2d(in[0], in[1], in[2], 1, 1);
              },
              {{{1, 1, 8, 8}}, {{1, 1, 3, 3}}, {{1}}}, 124);
}

TEST_CASE("gradcheck: frequency-domain ops") {
    gradcheck("fft2+ifft2",
              [](const std::vector<Tensor>& in) { return ifft2(fft2(in[0])); },
              {{{1, 1, 8, 8}}}, 131);
    // polar on a field bounded away from the origin and the branch cut
    gradcheck("polar",
              [](const std::vector<Tensor>& in) {
                  PolarParts p = polar(ComplexField{in[0], in[1]});
                  return add(p.magnitude, mul_scalar(p.phase, 0.5));
              },
              {{{1, 1, 4, 4}, 0.5, 1.5}, {{1, 1, 4, 4}, 0.5, 1.5}}, 132);
    gradcheck("unpolar",
              [](const std::vector<Tensor>& in) {
                  ComplexField f = unpolar(in[0], in[1]);
                  return add(f.real, mul_scalar(f.imag, 0.7));
              },
              {{{1, 1, 4, 4}, 0.5, 1.5}, {{1, 1, 4, 4}, -1.0, 1.0}}, 133);
}

TEST_CASE("gradcheck: composed frequency module") {
    // fft2 -> polar -> conv1x1 on magnitude and phase -> unpolar -> ifft2
    gradcheck("frequency module",
              [](const std::vector<Tensor>& in) {
                  ComplexField f = fft2(in[0]);
                  PolarParts p = polar(f);
                  Tensor m = conv1x1(p.magnitude, in[1]);
                  Tensor ph = conv1x1(p.phase, in[2]);
                  return ifft2(unpolar(m, ph));
              },
              {{{1, 2, 8, 8}, 0.1, 1.0}, {{2, 2, 1, 1}, 0.2, 1.0}, {{2, 2, 1, 1}, 0.2, 1.0}},
              134);
}
