#pragma once

#include <string>
#include <vector>

#include "ffmct/image.hpp"

namespace ffmct {

// Settings for the image-purification stage. Pre-smoothing and mask cleanup
// are anti-noise provisions for 2%-dose inputs; both default to the values
// used throughout the experiments and can be switched off for the literal
// mask path.
struct PurifySettings {
    double t = 0.1;
    std::string combination = "I";
    double presmooth_sigma_uldct = 1.0;
    double presmooth_sigma_ndct = 0.0;
    bool morph_cleanup = true;  // 3x3 open+close on the uLDCT mask
    double psp_threshold = 0.85;
};

// Otsu binarization over a 256-bin histogram of the (optionally Gaussian
// pre-smoothed) image. Structure = at-or-above threshold; ties go to the
// foreground. A constant image has no usable histogram and is rejected.
BinaryMask otsu_mask(const ImageGrid& img, double presmooth_sigma = 0.0);

// The threshold value itself (exposed for inspection and tests).
float otsu_threshold(const ImageGrid& img, double presmooth_sigma = 0.0);

// 3x3 binary open followed by close, replicated borders.
BinaryMask morph_open_close3(const BinaryMask& mask);

// Per-pixel logical OR of the two structure masks.
BinaryMask common_mask(const BinaryMask& m_l, const BinaryMask& m_n);

// Signed residual fields: v = uldct - ndct, v1 = off-mask (texture) part,
// v2 = on-mask (structure) part. v1 + v2 == v and v1 * v2 == 0 pixel-wise.
struct ResidualDecomposition {
    int width = 0;
    int height = 0;
    std::vector<float> v;
    std::vector<float> v1;
    std::vector<float> v2;
};

ResidualDecomposition decompose_residual(const ImageGrid& ndct, const ImageGrid& uldct,
                                         const BinaryMask& cm);

// Purified input: off-mask pixels blend uLDCT toward NDCT by T, on-mask
// pixels take NDCT outright. T = 0 keeps the raw texture, T = 1 returns NDCT.
ImageGrid ip_uldct(const ImageGrid& ndct, const ImageGrid& uldct, const BinaryMask& cm, double t);

// Purified label: NDCT texture with the uLDCT's structure support.
ImageGrid ip_ndct(const ImageGrid& ndct, const ImageGrid& uldct, const BinaryMask& cm);

// One fully purified sample.
struct PurifiedPair {
    ImageGrid ndct;
    ImageGrid uldct;
    ImageGrid purified_input;  // ip_uldct(ndct, uldct, cm, t)
    ImageGrid purified_label;  // ip_ndct(ndct, uldct, cm)
    BinaryMask cm;
    double t_param = 0.0;
    std::string id;
};

PurifiedPair purify_pair(const ImageGrid& ndct, const ImageGrid& uldct,
                         const PurifySettings& settings, std::string id = {});

enum class PairCombination { I, II, III };
PairCombination parse_combination(const std::string& tag);

// A flow-matching training record: x0 is the clean endpoint (label), x1 the
// noisy endpoint (input).
struct TrainingPair {
    ImageGrid label;
    ImageGrid input;
    std::string id;
};

std::vector<TrainingPair> make_training_pairs(const std::vector<PurifiedPair>& samples,
                                              PairCombination combination);

// Denoised outputs are scored against this label, never against raw NDCT.
const ImageGrid& evaluation_label(const PurifiedPair& sample);

// Patch-similarity filter baseline: keeps patches whose SSIM clears the
// threshold and reports the surviving fraction.
struct PspResult {
    int total_patches = 0;
    std::vector<int> kept;  // indices in row-major patch order
    double keep_ratio = 0.0;
};

PspResult psp_filter(const ImageGrid& ndct, const ImageGrid& uldct, int patch_size,
                     double threshold);

}  // namespace ffmct
