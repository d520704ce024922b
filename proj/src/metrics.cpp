#include "ffmct/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "ffmct/filters.hpp"

namespace ffmct {
namespace {

constexpr double kDataRange = 1.0;
constexpr double kPsnrCap = 99.0;
constexpr double kNqmCap = 99.0;

double mean_squared_error(const ImageGrid& a, const ImageGrid& b) {
    double acc = 0.0;
    for (size_t i = 0; i < a.values.size(); ++i) {
        const double d = static_cast<double>(a.values[i]) - b.values[i];
        acc += d * d;
    }
    return acc / static_cast<double>(a.values.size());
}

}  // namespace

std::vector<double> ssim_window_blur(const std::vector<double>& plane, int height, int width) {
    static const std::vector<double> taps = gaussian_kernel(11, 1.5);
    std::vector<double> out(plane.size());
    filter_separable(plane.data(), height, width, taps, out.data());
    return out;
}

double ssim_from_blurred(const std::vector<double>& mu_a, const std::vector<double>& mu_b,
                         const std::vector<double>& blur_aa, const std::vector<double>& blur_bb,
                         const std::vector<double>& blur_ab) {
    constexpr double c1 = (0.01 * kDataRange) * (0.01 * kDataRange);
    constexpr double c2 = (0.03 * kDataRange) * (0.03 * kDataRange);
    double acc = 0.0;
    for (size_t i = 0; i < mu_a.size(); ++i) {
        const double ma = mu_a[i], mb = mu_b[i];
        const double va = blur_aa[i] - ma * ma;
        const double vb = blur_bb[i] - mb * mb;
        const double cab = blur_ab[i] - ma * mb;
        acc += ((2.0 * ma * mb + c1) * (2.0 * cab + c2)) /
               ((ma * ma + mb * mb + c1) * (va + vb + c2));
    }
    return acc / static_cast<double>(mu_a.size());
}

double ssim(const ImageGrid& a, const ImageGrid& b) {
    check_same_extents(a, b, "ssim");
    const int h = a.height, w = a.width;
    auto pa = image_to_double(a);
    auto pb = image_to_double(b);
    std::vector<double> aa(pa.size()), bb(pa.size()), ab(pa.size());
    for (size_t i = 0; i < pa.size(); ++i) {
        aa[i] = pa[i] * pa[i];
        bb[i] = pb[i] * pb[i];
        ab[i] = pa[i] * pb[i];
    }
    return ssim_from_blurred(ssim_window_blur(pa, h, w), ssim_window_blur(pb, h, w),
                             ssim_window_blur(aa, h, w), ssim_window_blur(bb, h, w),
                             ssim_window_blur(ab, h, w));
}

double rmse(const ImageGrid& a, const ImageGrid& b) {
    check_same_extents(a, b, "rmse");
    return std::sqrt(mean_squared_error(a, b));
}

double psnr(const ImageGrid& candidate, const ImageGrid& reference) {
    check_same_extents(candidate, reference, "psnr");
    const double mse = mean_squared_error(candidate, reference);
    if (mse <= 0.0) return kPsnrCap;
    return std::min(kPsnrCap, 10.0 * std::log10(kDataRange * kDataRange / mse));
}

double gmsd(const ImageGrid& a, const ImageGrid& b) {
    check_same_extents(a, b, "gmsd");
    const int h = a.height, w = a.width;
    static const double px[9] = {1.0 / 3, 0, -1.0 / 3, 1.0 / 3, 0, -1.0 / 3, 1.0 / 3, 0, -1.0 / 3};
    static const double py[9] = {1.0 / 3, 1.0 / 3, 1.0 / 3, 0, 0, 0, -1.0 / 3, -1.0 / 3, -1.0 / 3};
    constexpr double c = 170.0 / (255.0 * 255.0);  // stabilizer rescaled to data range 1

    auto gm_of = [&](const ImageGrid& img) {
        auto p = image_to_double(img);
        std::vector<double> gx(p.size()), gy(p.size()), gm(p.size());
        filter2d(p.data(), h, w, px, 3, 3, gx.data());
        filter2d(p.data(), h, w, py, 3, 3, gy.data());
        for (size_t i = 0; i < p.size(); ++i) gm[i] = std::sqrt(gx[i] * gx[i] + gy[i] * gy[i]);
        return gm;
    };
    auto ga = gm_of(a);
    auto gb = gm_of(b);
    std::vector<double> gms(ga.size());
    double mean = 0.0;
    for (size_t i = 0; i < ga.size(); ++i) {
        gms[i] = (2.0 * ga[i] * gb[i] + c) / (ga[i] * ga[i] + gb[i] * gb[i] + c);
        mean += gms[i];
    }
    mean /= static_cast<double>(gms.size());
    double var = 0.0;
    for (double v : gms) var += (v - mean) * (v - mean);
    return std::sqrt(var / static_cast<double>(gms.size()));
}

double vif(const ImageGrid& candidate, const ImageGrid& reference) {
    check_same_extents(candidate, reference, "vif");
    FFMCT_CHECK_ARG(candidate.width >= 32 && candidate.height >= 32,
                    "vif: image too small for the 4-level pyramid, need >= 32x32");
    constexpr double sigma_nsq = 1e-3;

    // joint normalization by the reference's global std makes the score
    // invariant to a global linear rescale of the pair
    auto ref = image_to_double(reference);
    auto dist = image_to_double(candidate);
    double mean = 0.0;
    for (double v : ref) mean += v;
    mean /= static_cast<double>(ref.size());
    double var = 0.0;
    for (double v : ref) var += (v - mean) * (v - mean);
    var /= static_cast<double>(ref.size());
    const double norm = std::max(std::sqrt(var), 1e-9);
    for (auto& v : ref) v /= norm;
    for (auto& v : dist) v /= norm;

    std::int64_t h = candidate.height, w = candidate.width;
    double num = 0.0, den = 0.0;
    for (int scale = 1; scale <= 4; ++scale) {
        const int n = (1 << (4 - scale + 1)) + 1;  // 17, 9, 5, 3
        const auto win = gaussian_kernel(n, static_cast<double>(n) / 5.0);
        if (scale > 1) {
            std::vector<double> tmp(ref.size());
            filter_separable(ref.data(), h, w, win, tmp.data());
            ref.swap(tmp);
            filter_separable(dist.data(), h, w, win, tmp.data());
            dist.swap(tmp);
            // decimate by 2
            const std::int64_t oh = h / 2, ow = w / 2;
            std::vector<double> r2(static_cast<size_t>(oh * ow)), d2(static_cast<size_t>(oh * ow));
            for (std::int64_t y = 0; y < oh; ++y)
                for (std::int64_t x = 0; x < ow; ++x) {
                    r2[y * ow + x] = ref[(2 * y) * w + 2 * x];
                    d2[y * ow + x] = dist[(2 * y) * w + 2 * x];
                }
            ref.swap(r2);
            dist.swap(d2);
            h = oh;
            w = ow;
        }
        const size_t sz = ref.size();
        std::vector<double> mu1(sz), mu2(sz), rr(sz), dd(sz), rd(sz), brr(sz), bdd(sz), brd(sz);
        for (size_t i = 0; i < sz; ++i) {
            rr[i] = ref[i] * ref[i];
            dd[i] = dist[i] * dist[i];
            rd[i] = ref[i] * dist[i];
        }
        filter_separable(ref.data(), h, w, win, mu1.data());
        filter_separable(dist.data(), h, w, win, mu2.data());
        filter_separable(rr.data(), h, w, win, brr.data());
        filter_separable(dd.data(), h, w, win, bdd.data());
        filter_separable(rd.data(), h, w, win, brd.data());
        for (size_t i = 0; i < sz; ++i) {
            double sigma1_sq = brr[i] - mu1[i] * mu1[i];
            double sigma2_sq = bdd[i] - mu2[i] * mu2[i];
            double sigma12 = brd[i] - mu1[i] * mu2[i];
            sigma1_sq = std::max(sigma1_sq, 0.0);
            sigma2_sq = std::max(sigma2_sq, 0.0);
            double g = sigma12 / (sigma1_sq + 1e-10);
            double sv_sq = sigma2_sq - g * sigma12;
            if (sigma1_sq < 1e-10) {
                g = 0.0;
                sv_sq = sigma2_sq;
                sigma1_sq = 0.0;
            }
            if (g < 0.0) {
                sv_sq = sigma2_sq;
                g = 0.0;
            }
            sv_sq = std::max(sv_sq, 1e-10);
            num += std::log10(1.0 + g * g * sigma1_sq / (sv_sq + sigma_nsq));
            den += std::log10(1.0 + sigma1_sq / sigma_nsq);
        }
    }
    if (den == 0.0) return 1.0;  // constant reference: no information either way
    return num / den;
}

double nqm(const ImageGrid& candidate, const ImageGrid& reference) {
    check_same_extents(candidate, reference, "nqm");
    FFMCT_CHECK_ARG(candidate.width >= 32 && candidate.height >= 32,
                    "nqm: image too small for the contrast pyramid, need >= 32x32");
    constexpr int kBands = 5;
    constexpr double kThresholds[kBands] = {0.010, 0.008, 0.006, 0.005, 0.005};
    constexpr double kLumFloor = 0.05;

    const std::int64_t h = candidate.height, w = candidate.width;
    auto contrast_bands = [&](const ImageGrid& img) {
        std::vector<std::vector<double>> bands;
        std::vector<double> prev = image_to_double(img);
        double sigma = 1.0;
        for (int k = 0; k < kBands; ++k) {
            std::vector<double> low = prev;
            gaussian_blur(low, h, w, sigma);
            std::vector<double> band(prev.size());
            for (size_t i = 0; i < prev.size(); ++i) {
                band[i] = (prev[i] - low[i]) / std::max(low[i], kLumFloor);
                if (std::abs(band[i]) < kThresholds[k]) band[i] = 0.0;  // below visibility
            }
            bands.push_back(std::move(band));
            prev = std::move(low);
            sigma *= 2.0;
        }
        return bands;
    };

    auto bref = contrast_bands(reference);
    auto bcand = contrast_bands(candidate);
    double signal = 0.0, noise = 0.0;
    for (int k = 0; k < kBands; ++k) {
        for (size_t i = 0; i < bref[static_cast<size_t>(k)].size(); ++i) {
            const double r = bref[static_cast<size_t>(k)][i];
            const double c = bcand[static_cast<size_t>(k)][i];
            signal += r * r;
            noise += (r - c) * (r - c);
        }
    }
    if (noise <= 0.0) return kNqmCap;
    if (signal <= 0.0) return 0.0;
    return std::min(kNqmCap, 10.0 * std::log10(signal / noise));
}

void validate_report(const MetricReport& r) {
    constexpr double eps = 1e-6;
    FFMCT_CHECK_RUNTIME(r.ssim >= -1.0 - eps && r.ssim <= 1.0 + eps, "ssim out of range: ", r.ssim);
    FFMCT_CHECK_RUNTIME(r.fsim >= 0.0 && r.fsim <= 1.0 + eps, "fsim out of range: ", r.fsim);
    FFMCT_CHECK_RUNTIME(r.vif >= 0.0 && r.vif <= 1.0 + eps, "vif out of range: ", r.vif);
    FFMCT_CHECK_RUNTIME(r.rmse >= 0.0, "rmse negative: ", r.rmse);
    FFMCT_CHECK_RUNTIME(r.gmsd >= 0.0, "gmsd negative: ", r.gmsd);
    FFMCT_CHECK_RUNTIME(std::isfinite(r.psnr) && r.psnr <= 99.0, "psnr out of range: ", r.psnr);
    FFMCT_CHECK_RUNTIME(std::isfinite(r.nqm) && r.nqm <= 99.0, "nqm out of range: ", r.nqm);
}

MetricReport evaluate_pair(const ImageGrid& candidate, const ImageGrid& reference) {
    MetricReport r;
    r.data_range = kDataRange;
    r.fsim = fsim(candidate, reference);
    r.gmsd = gmsd(candidate, reference);
    r.ssim = ssim(candidate, reference);
    r.vif = vif(candidate, reference);
    r.nqm = nqm(candidate, reference);
    r.psnr = psnr(candidate, reference);
    r.rmse = rmse(candidate, reference);
    validate_report(r);
    return r;
}

AggregateReport aggregate(const std::vector<MetricReport>& reports) {
    FFMCT_CHECK_ARG(!reports.empty(), "aggregate: empty report set");
    const double n = static_cast<double>(reports.size());
    AggregateReport agg;
    agg.count = reports.size();
    auto each = [](MetricReport& r, auto&& fn) {
        fn(r.fsim);
        fn(r.gmsd);
        fn(r.ssim);
        fn(r.vif);
        fn(r.nqm);
        fn(r.psnr);
        fn(r.rmse);
    };
    auto fields = [](const MetricReport& r) {
        return std::array<double, 7>{r.fsim, r.gmsd, r.ssim, r.vif, r.nqm, r.psnr, r.rmse};
    };
    std::array<double, 7> sum{}, sq{};
    for (const auto& r : reports) {
        auto f = fields(r);
        for (size_t i = 0; i < 7; ++i) {
            sum[i] += f[i];
            sq[i] += f[i] * f[i];
        }
    }
    size_t idx = 0;
    each(agg.mean, [&](double& v) { v = sum[idx++] / n; });
    idx = 0;
    each(agg.stddev, [&](double& v) {
        const double m = sum[idx] / n;
        v = std::sqrt(std::max(0.0, sq[idx] / n - m * m));
        ++idx;
    });
    agg.mean.data_range = kDataRange;
    agg.stddev.data_range = kDataRange;
    return agg;
}

AggregateReport evaluate_split(
    const std::vector<std::pair<std::string, ImageGrid>>& candidates,
    const std::vector<std::pair<std::string, ImageGrid>>& references,
    std::vector<MetricReport>* per_image) {
    FFMCT_CHECK_ARG(!candidates.empty(), "evaluate_split: empty candidate set");
    FFMCT_CHECK_ARG(candidates.size() == references.size(),
                    "evaluate_split: candidate/reference count mismatch: ", candidates.size(),
                    " vs ", references.size());
    std::map<std::string, const ImageGrid*> by_id;
    for (const auto& [id, img] : references) by_id[id] = &img;

    std::vector<MetricReport> reports;
    reports.reserve(candidates.size());
    for (const auto& [id, img] : candidates) {
        auto it = by_id.find(id);
        FFMCT_CHECK_ARG(it != by_id.end(), "evaluate_split: no reference for sample id '", id, "'");
        reports.push_back(evaluate_pair(img, *it->second));
    }
    if (per_image) *per_image = reports;
    return aggregate(reports);
}

}  // namespace ffmct
