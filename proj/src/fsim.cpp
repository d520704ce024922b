// FSIM: phase congruency (log-Gabor bank) + gradient similarity, pooled by
// the maximum phase-congruency map, following the published algorithm.
// Constants are listed in metrics.hpp.

#include <algorithm>
#include <cmath>
#include <vector>

#include "ffmct/fft.hpp"
#include "ffmct/filters.hpp"
#include "ffmct/metrics.hpp"

namespace ffmct {
namespace {

constexpr int kScales = 4;
constexpr int kOrients = 4;
constexpr double kMinWaveLength = 6.0;
constexpr double kMult = 2.0;
constexpr double kSigmaOnf = 0.55;
constexpr double kDThetaOnSigma = 1.2;
constexpr double kNoiseK = 2.0;
constexpr double kEpsilon = 1e-4;
constexpr double kT1 = 0.85;
constexpr double kT2 = 160.0;
constexpr double kPi = 3.14159265358979323846;

struct Plane {
    std::int64_t h = 0, w = 0;
    std::vector<double> v;
};

double median_of(std::vector<double> values) {
    const size_t mid = values.size() / 2;
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid),
                     values.end());
    double m = values[mid];
    if (values.size() % 2 == 0) {
        auto lower = std::max_element(values.begin(),
                                      values.begin() + static_cast<std::ptrdiff_t>(mid));
        m = 0.5 * (m + *lower);
    }
    return m;
}

// Phase congruency map (Kovesi's measure as used by FSIM).
Plane phase_congruency(const Plane& img) {
    const std::int64_t h = img.h, w = img.w;
    const std::int64_t n = h * w;

    // frequency grid, unshifted layout
    std::vector<double> radius(static_cast<size_t>(n)), theta(static_cast<size_t>(n));
    for (std::int64_t y = 0; y < h; ++y) {
        const double fy = (y <= h / 2 ? y : y - h) / static_cast<double>(h);
        for (std::int64_t x = 0; x < w; ++x) {
            const double fx = (x <= w / 2 ? x : x - w) / static_cast<double>(w);
            radius[y * w + x] = std::sqrt(fx * fx + fy * fy);
            theta[y * w + x] = std::atan2(-fy, fx);
        }
    }
    radius[0] = 1.0;  // avoid log(0) at DC; the filters zero it explicitly

    // radial log-Gabor components with a raised butterworth lowpass
    std::vector<std::vector<double>> log_gabor(kScales);
    const double log_sigma = std::log(kSigmaOnf);
    for (int s = 0; s < kScales; ++s) {
        const double wavelength = kMinWaveLength * std::pow(kMult, s);
        const double fo = 1.0 / wavelength;
        auto& lg = log_gabor[static_cast<size_t>(s)];
        lg.resize(static_cast<size_t>(n));
        for (std::int64_t i = 0; i < n; ++i) {
            const double lr = std::log(radius[i] / fo);
            double g = std::exp(-(lr * lr) / (2.0 * log_sigma * log_sigma));
            g *= 1.0 / (1.0 + std::pow(radius[i] / 0.45, 2.0 * 15.0));  // lowpass
            lg[i] = g;
        }
        lg[0] = 0.0;
    }

    // angular spreads
    const double theta_sigma = kPi / kOrients / kDThetaOnSigma;
    std::vector<std::vector<double>> spread(kOrients);
    for (int o = 0; o < kOrients; ++o) {
        const double angle = o * kPi / kOrients;
        auto& sp = spread[static_cast<size_t>(o)];
        sp.resize(static_cast<size_t>(n));
        for (std::int64_t i = 0; i < n; ++i) {
            const double ds = std::sin(theta[i]) * std::cos(angle) -
                              std::cos(theta[i]) * std::sin(angle);
            const double dc = std::cos(theta[i]) * std::cos(angle) +
                              std::sin(theta[i]) * std::sin(angle);
            const double dtheta = std::abs(std::atan2(ds, dc));
            sp[i] = std::exp(-(dtheta * dtheta) / (2.0 * theta_sigma * theta_sigma));
        }
    }

    std::vector<double> im_re(img.v), im_im(static_cast<size_t>(n), 0.0);
    fft2_plane_inplace(im_re, im_im, h, w, /*inverse=*/false);

    std::vector<double> energy_all(static_cast<size_t>(n), 0.0);
    std::vector<double> an_all(static_cast<size_t>(n), 0.0);

    std::vector<std::vector<double>> eo_re(kScales), eo_im(kScales);
    for (int o = 0; o < kOrients; ++o) {
        std::vector<double> sum_e(static_cast<size_t>(n), 0.0);
        std::vector<double> sum_o(static_cast<size_t>(n), 0.0);
        std::vector<double> sum_an(static_cast<size_t>(n), 0.0);
        double tau = 0.0;
        for (int s = 0; s < kScales; ++s) {
            auto& re = eo_re[static_cast<size_t>(s)];
            auto& im = eo_im[static_cast<size_t>(s)];
            re.resize(static_cast<size_t>(n));
            im.resize(static_cast<size_t>(n));
            const auto& lg = log_gabor[static_cast<size_t>(s)];
            const auto& sp = spread[static_cast<size_t>(o)];
            for (std::int64_t i = 0; i < n; ++i) {
                const double f = lg[i] * sp[i];
                re[i] = im_re[i] * f;
                im[i] = im_im[i] * f;
            }
            fft2_plane_inplace(re, im, h, w, /*inverse=*/true);
            std::vector<double> an(static_cast<size_t>(n));
            for (std::int64_t i = 0; i < n; ++i) {
                an[i] = std::hypot(re[i], im[i]);
                sum_an[i] += an[i];
                sum_e[i] += re[i];
                sum_o[i] += im[i];
            }
            if (s == 0) tau = median_of(an) / std::sqrt(std::log(4.0));
        }
        std::vector<double> energy(static_cast<size_t>(n), 0.0);
        for (std::int64_t i = 0; i < n; ++i) {
            const double x_energy = std::hypot(sum_e[i], sum_o[i]) + kEpsilon;
            const double mean_e = sum_e[i] / x_energy;
            const double mean_o = sum_o[i] / x_energy;
            double acc = 0.0;
            for (int s = 0; s < kScales; ++s) {
                const double er = eo_re[static_cast<size_t>(s)][i];
                const double ei = eo_im[static_cast<size_t>(s)][i];
                acc += er * mean_e + ei * mean_o - std::abs(er * mean_o - ei * mean_e);
            }
            energy[i] = acc;
        }
        // noise threshold estimated from the smallest-scale response
        const double total_tau =
            tau * (1.0 - std::pow(1.0 / kMult, kScales)) / (1.0 - 1.0 / kMult);
        const double noise_mean = total_tau * std::sqrt(kPi / 2.0);
        const double noise_sigma = total_tau * std::sqrt((4.0 - kPi) / 2.0);
        const double threshold = noise_mean + kNoiseK * noise_sigma;
        for (std::int64_t i = 0; i < n; ++i) {
            energy_all[i] += std::max(energy[i] - threshold, 0.0);
            an_all[i] += sum_an[i];
        }
    }

    Plane pc;
    pc.h = h;
    pc.w = w;
    pc.v.resize(static_cast<size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) pc.v[i] = energy_all[i] / (an_all[i] + kEpsilon);
    return pc;
}

Plane scharr_gradient(const Plane& img) {
    static const double gx[9] = {3.0 / 16, 0, -3.0 / 16, 10.0 / 16, 0,
                                 -10.0 / 16, 3.0 / 16, 0, -3.0 / 16};
    static const double gy[9] = {3.0 / 16, 10.0 / 16, 3.0 / 16, 0, 0, 0,
                                 -3.0 / 16, -10.0 / 16, -3.0 / 16};
    Plane out;
    out.h = img.h;
    out.w = img.w;
    out.v.resize(img.v.size());
    std::vector<double> dx(img.v.size()), dy(img.v.size());
    filter2d(img.v.data(), img.h, img.w, gx, 3, 3, dx.data());
    filter2d(img.v.data(), img.h, img.w, gy, 3, 3, dy.data());
    for (size_t i = 0; i < img.v.size(); ++i) out.v[i] = std::hypot(dx[i], dy[i]);
    return out;
}

Plane to_plane_255(const ImageGrid& img, int pool) {
    Plane p;
    std::vector<double> full = image_to_double(img);
    std::int64_t h = img.height, w = img.width;
    for (int f = pool; f > 1; f /= 2) full = downsample2_mean(full, h, w);
    p.h = h;
    p.w = w;
    p.v = std::move(full);
    for (auto& v : p.v) v *= 255.0;
    return p;
}

}  // namespace

double fsim(const ImageGrid& a, const ImageGrid& b) {
    check_same_extents(a, b, "fsim");
    FFMCT_CHECK_ARG(a.width >= 32 && a.height >= 32,
                    "fsim: image too small for the log-Gabor filter bank, need >= 32x32");
    FFMCT_CHECK_ARG(is_power_of_two(a.width) && is_power_of_two(a.height),
                    "fsim: power-of-two extents required by the FFT-based filter bank");

    // standard pre-pooling for large images; unity at desk scale
    int pool = std::max(1, static_cast<int>(std::lround(std::min(a.width, a.height) / 256.0)));
    if ((pool & (pool - 1)) != 0) pool = 1 << static_cast<int>(std::lround(std::log2(pool)));

    Plane pa = to_plane_255(a, pool);
    Plane pb = to_plane_255(b, pool);

    Plane pc1 = phase_congruency(pa);
    Plane pc2 = phase_congruency(pb);
    Plane g1 = scharr_gradient(pa);
    Plane g2 = scharr_gradient(pb);

    double num = 0.0, den = 0.0;
    for (size_t i = 0; i < pc1.v.size(); ++i) {
        const double s_pc = (2.0 * pc1.v[i] * pc2.v[i] + kT1) /
                            (pc1.v[i] * pc1.v[i] + pc2.v[i] * pc2.v[i] + kT1);
        const double s_g = (2.0 * g1.v[i] * g2.v[i] + kT2) /
                           (g1.v[i] * g1.v[i] + g2.v[i] * g2.v[i] + kT2);
        const double pcm = std::max(pc1.v[i], pc2.v[i]);
        num += s_pc * s_g * pcm;
        den += pcm;
    }
    if (den <= 0.0) return 1.0;  // featureless pair
    return num / den;
}

}  // namespace ffmct
