#pragma once

#include <string>
#include <utility>
#include <vector>

#include "ffmct/image.hpp"

namespace ffmct {

// Full-reference quality metrics. Images are normalized to [0,1] and the
// data range is fixed to 1.0. Asymmetric metrics (PSNR, VIF, NQM) take
// (candidate, reference) in that order.
//
// Pinned constants, enumerated here because the evaluation protocol names the
// metrics without parameters:
//   SSIM  - 11x11 Gaussian window sigma 1.5, K1 = 0.01, K2 = 0.03.
//   PSNR  - capped at 99 dB when the MSE vanishes.
//   GMSD  - Prewitt kernels / 3, stabilizer c = 170 * (1/255)^2, score is the
//           population standard deviation of the similarity map.
//   FSIM  - log-Gabor bank: 4 scales x 4 orientations, minWaveLength 6,
//           mult 2, sigmaOnf 0.55, dThetaOnSigma 1.2, noise k = 2;
//           Scharr gradient / 16, T1 = 0.85, T2 = 160 on the 0..255 scale.
//   VIF   - pixel-domain, 4-level Gaussian pyramid (windows 17/9/5/3,
//           sigma = size/5), noise variance 1e-3 after both images are
//           normalized by the reference's global standard deviation (this
//           makes the score invariant to a global linear rescale of the pair).
//   NQM   - approximate: 5-octave Peli contrast pyramid, per-band visibility
//           thresholds {0.010, 0.008, 0.006, 0.005, 0.005}, weighted SNR in
//           dB, capped at 99. Flagged approximate in reports.
// All windowed filters use symmetric (edge-inclusive) padding.

double ssim(const ImageGrid& a, const ImageGrid& b);
double psnr(const ImageGrid& candidate, const ImageGrid& reference);
double rmse(const ImageGrid& a, const ImageGrid& b);
double gmsd(const ImageGrid& a, const ImageGrid& b);
double fsim(const ImageGrid& a, const ImageGrid& b);
double vif(const ImageGrid& candidate, const ImageGrid& reference);
double nqm(const ImageGrid& candidate, const ImageGrid& reference);

// SSIM internals, shared with the crossing-rate analysis so interpolated
// pairs can be scored from precomputed moment maps.
std::vector<double> ssim_window_blur(const std::vector<double>& plane, int height, int width);
double ssim_from_blurred(const std::vector<double>& mu_a, const std::vector<double>& mu_b,
                         const std::vector<double>& blur_aa, const std::vector<double>& blur_bb,
                         const std::vector<double>& blur_ab);

struct MetricReport {
    double fsim = 0.0;
    double gmsd = 0.0;
    double ssim = 0.0;
    double vif = 0.0;
    double nqm = 0.0;
    double psnr = 0.0;
    double rmse = 0.0;
    double data_range = 1.0;
};

// Range invariants of a single report; throws on violation.
void validate_report(const MetricReport& report);

struct AggregateReport {
    MetricReport mean;
    MetricReport stddev;  // population standard deviation
    size_t count = 0;
};

MetricReport evaluate_pair(const ImageGrid& candidate, const ImageGrid& reference);
AggregateReport aggregate(const std::vector<MetricReport>& reports);

// Evaluates candidates against references aligned by sample id.
AggregateReport evaluate_split(
    const std::vector<std::pair<std::string, ImageGrid>>& candidates,
    const std::vector<std::pair<std::string, ImageGrid>>& references,
    std::vector<MetricReport>* per_image = nullptr);

}  // namespace ffmct
