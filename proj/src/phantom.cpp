#include "ffmct/phantom.hpp"

#include <cmath>
#include <fstream>

#include "ffmct/rng.hpp"
#include "json.hpp"

namespace ffmct {
namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

struct Ellipse {
    double cx, cy;     // center, pixels
    double ax, ay;     // semi-axes, pixels
    double angle;      // radians
    double amplitude;  // signed intensity contribution
    double edge;       // soft-edge width in normalized radius units
};

void add_ellipse(std::vector<double>& plane, int size, const Ellipse& e) {
    const double ca = std::cos(e.angle), sa = std::sin(e.angle);
    for (int y = 0; y < size; ++y) {
        for (int x = 0; x < size; ++x) {
            const double px = x - e.cx, py = y - e.cy;
            const double u = (px * ca + py * sa) / e.ax;
            const double v = (-px * sa + py * ca) / e.ay;
            const double r = std::sqrt(u * u + v * v);
            plane[static_cast<size_t>(y) * size + x] +=
                e.amplitude / (1.0 + std::exp((r - 1.0) / e.edge));
        }
    }
}

}  // namespace

ImageGrid generate_phantom(std::uint64_t seed, int size) {
    FFMCT_CHECK_ARG(size >= 8 && (size & (size - 1)) == 0,
                    "generate_phantom: size must be a power of two >= 8, got ", size);
    Rng rng = Rng::derive(seed, {Rng::hash_tag("phantom")});
    const double s = static_cast<double>(size);
    std::vector<double> plane(static_cast<size_t>(size) * size);

    // low-frequency background
    const double base = rng.uniform(0.08, 0.14);
    const double bg_amp = rng.uniform(0.01, 0.03);
    const double bg_fx = rng.uniform(0.5, 1.5), bg_fy = rng.uniform(0.5, 1.5);
    const double bg_ph = rng.uniform(0.0, kTwoPi);
    for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x)
            plane[static_cast<size_t>(y) * size + x] =
                base + bg_amp * std::sin(kTwoPi * (bg_fx * x + bg_fy * y) / s + bg_ph);

    // family anatomy with per-sample jitter: body, two lung fields, spine
    auto jitter = [&](double frac) { return rng.uniform(-frac, frac); };
    Ellipse body{s * (0.50 + jitter(0.02)), s * (0.52 + jitter(0.02)),
                 s * (0.42 + jitter(0.03)), s * (0.35 + jitter(0.03)),
                 jitter(0.08),              rng.uniform(0.52, 0.62),
                 0.035};
    add_ellipse(plane, size, body);
    for (int lung = 0; lung < 2; ++lung) {
        const double cx = lung == 0 ? 0.34 : 0.66;
        Ellipse l{s * (cx + jitter(0.02)),   s * (0.50 + jitter(0.02)),
                  s * (0.155 + jitter(0.02)), s * (0.23 + jitter(0.02)),
                  jitter(0.12),              -rng.uniform(0.38, 0.46),
                  0.05};
        add_ellipse(plane, size, l);
    }
    Ellipse spine{s * (0.50 + jitter(0.01)), s * (0.80 + jitter(0.01)), s * 0.055, s * 0.045,
                  jitter(0.2),               rng.uniform(0.22, 0.32),   0.08};
    add_ellipse(plane, size, spine);

    // random internal structures (vessels, nodules) inside the lung fields
    const int extras = 3 + static_cast<int>(rng.next_below(9));  // 3..11
    for (int i = 0; i < extras; ++i) {
        const bool left = rng.uniform() < 0.5;
        const double cx = (left ? 0.34 : 0.66) + rng.uniform(-0.10, 0.10);
        const double cy = 0.50 + rng.uniform(-0.16, 0.16);
        Ellipse v{s * cx,
                  s * cy,
                  std::max(1.2, s * rng.uniform(0.015, 0.055)),
                  std::max(1.2, s * rng.uniform(0.015, 0.055)),
                  rng.uniform(0.0, kTwoPi),
                  rng.uniform(0.14, 0.34),
                  0.12};
        add_ellipse(plane, size, v);
    }

    ImageGrid img(size, size);
    for (size_t i = 0; i < plane.size(); ++i)
        img.values[i] = static_cast<float>(std::min(1.0, std::max(0.0, plane[i])));
    validate_image(img, "generate_phantom");
    return img;
}

DeformationField make_deformation(std::uint64_t seed, int size, double max_px, int components) {
    FFMCT_CHECK_ARG(size > 0, "make_deformation: bad size");
    FFMCT_CHECK_ARG(max_px >= 0.0, "make_deformation: negative magnitude");
    FFMCT_CHECK_ARG(components >= 1 && components <= 4,
                    "make_deformation: components must be in [1,4]");
    DeformationField field;
    field.width = size;
    field.height = size;
    field.max_magnitude = max_px;
    if (max_px == 0.0) return field;

    Rng rng = Rng::derive(seed, {Rng::hash_tag("deform")});
    struct Wave {
        double amp, fx, fy, phase;
    };
    std::vector<Wave> wx, wy;
    for (int c = 0; c < components; ++c) {
        wx.push_back({rng.uniform(0.3, 1.0), rng.uniform(0.5, 2.0), rng.uniform(0.5, 2.0),
                      rng.uniform(0.0, kTwoPi)});
        wy.push_back({rng.uniform(0.3, 1.0), rng.uniform(0.5, 2.0), rng.uniform(0.5, 2.0),
                      rng.uniform(0.0, kTwoPi)});
    }
    const double s = static_cast<double>(size);
    field.dx.resize(static_cast<size_t>(size) * size);
    field.dy.resize(static_cast<size_t>(size) * size);
    double max_mag = 0.0;
    for (int y = 0; y < size; ++y) {
        for (int x = 0; x < size; ++x) {
            double ddx = 0.0, ddy = 0.0;
            for (const auto& w : wx)
                ddx += w.amp * std::sin(kTwoPi * (w.fx * x + w.fy * y) / s + w.phase);
            for (const auto& w : wy)
                ddy += w.amp * std::sin(kTwoPi * (w.fx * x + w.fy * y) / s + w.phase);
            field.dx[static_cast<size_t>(y) * size + x] = static_cast<float>(ddx);
            field.dy[static_cast<size_t>(y) * size + x] = static_cast<float>(ddy);
            max_mag = std::max(max_mag, std::sqrt(ddx * ddx + ddy * ddy));
        }
    }
    if (max_mag > 0.0) {
        const float scale = static_cast<float>(max_px / max_mag);
        for (auto& v : field.dx) v *= scale;
        for (auto& v : field.dy) v *= scale;
    }
    return field;
}

ImageGrid deform(const ImageGrid& img, const DeformationField& field) {
    validate_image(img, "deform: input");
    if (field.zero()) return img;
    FFMCT_CHECK_ARG(field.width == img.width && field.height == img.height,
                    "deform: field extents do not match image");
    ImageGrid out(img.width, img.height);
    const int W = img.width, H = img.height;
    for (int y = 0; y < H; ++y) {
        for (int x = 0; x < W; ++x) {
            const size_t i = static_cast<size_t>(y) * W + x;
            // backward warp: sample the source at p + d(p), borders replicated
            double sx = x + field.dx[i];
            double sy = y + field.dy[i];
            sx = std::min(static_cast<double>(W - 1), std::max(0.0, sx));
            sy = std::min(static_cast<double>(H - 1), std::max(0.0, sy));
            const int x0 = static_cast<int>(sx), y0 = static_cast<int>(sy);
            const int x1 = std::min(x0 + 1, W - 1), y1 = std::min(y0 + 1, H - 1);
            const double fx = sx - x0, fy = sy - y0;
            const double v = (1 - fy) * ((1 - fx) * img.at(y0, x0) + fx * img.at(y0, x1)) +
                             fy * ((1 - fx) * img.at(y1, x0) + fx * img.at(y1, x1));
            out.values[i] = static_cast<float>(std::min(1.0, std::max(0.0, v)));
        }
    }
    return out;
}

ImageGrid apply_noise(const ImageGrid& img, const NoiseModel& model, std::uint64_t seed) {
    validate_image(img, "apply_noise: input");
    FFMCT_CHECK_ARG(model.dose_fraction > 0.0 && model.dose_fraction <= 1.0,
                    "apply_noise: dose_fraction must lie in (0,1], got ", model.dose_fraction);
    FFMCT_CHECK_ARG(model.photon_scale > 0.0, "apply_noise: photon_scale must be positive");
    FFMCT_CHECK_ARG(model.electronic_sigma >= 0.0, "apply_noise: negative electronic noise");

    Rng rng = Rng::derive(seed, {Rng::hash_tag("noise")});
    const double flux = model.photon_scale * model.dose_fraction;
    ImageGrid out(img.width, img.height);
    for (size_t i = 0; i < img.values.size(); ++i) {
        const double v = img.values[i];
        const double lambda = flux * std::exp(-model.attenuation_mu * v);
        double counts = static_cast<double>(rng.poisson(lambda));
        if (model.electronic_sigma > 0.0) counts += model.electronic_sigma * rng.normal();
        counts = std::max(counts, 0.5);  // photon starvation floor
        const double measured = -std::log(counts / flux) / model.attenuation_mu;
        out.values[i] = static_cast<float>(std::min(1.0, std::max(0.0, measured)));
    }
    return out;
}

void split_counts(int total, int& train, int& val, int& test) {
    FFMCT_CHECK_ARG(total >= 1, "split_counts: empty dataset");
    train = static_cast<int>(std::llround(total * 0.7));
    val = static_cast<int>(std::llround(total * 0.15));
    if (train + val > total) val = total - train;
    test = total - train - val;
    FFMCT_CHECK_RUNTIME(train >= 1 && val >= 0 && test >= 0, "split_counts: degenerate split for ",
                        total, " samples");
}

namespace {

nlohmann::json noise_to_json(const NoiseModel& n) {
    return {{"dose_fraction", n.dose_fraction},
            {"photon_scale", n.photon_scale},
            {"electronic_sigma", n.electronic_sigma},
            {"attenuation_mu", n.attenuation_mu}};
}

NoiseModel noise_from_json(const nlohmann::json& j) {
    NoiseModel n;
    n.dose_fraction = j.at("dose_fraction").get<double>();
    n.photon_scale = j.at("photon_scale").get<double>();
    n.electronic_sigma = j.at("electronic_sigma").get<double>();
    n.attenuation_mu = j.at("attenuation_mu").get<double>();
    return n;
}

nlohmann::json purify_to_json(const PurifySettings& p) {
    return {{"t", p.t},
            {"combination", p.combination},
            {"presmooth_sigma_uldct", p.presmooth_sigma_uldct},
            {"presmooth_sigma_ndct", p.presmooth_sigma_ndct},
            {"morph_cleanup", p.morph_cleanup},
            {"psp_threshold", p.psp_threshold}};
}

PurifySettings purify_from_json(const nlohmann::json& j) {
    PurifySettings p;
    p.t = j.at("t").get<double>();
    p.combination = j.at("combination").get<std::string>();
    p.presmooth_sigma_uldct = j.at("presmooth_sigma_uldct").get<double>();
    p.presmooth_sigma_ndct = j.at("presmooth_sigma_ndct").get<double>();
    p.morph_cleanup = j.at("morph_cleanup").get<bool>();
    p.psp_threshold = j.at("psp_threshold").get<double>();
    return p;
}

}  // namespace

std::vector<const SampleRecord*> DatasetManifest::split_samples(const std::string& split) const {
    std::vector<const SampleRecord*> out;
    for (const auto& s : samples)
        if (s.split == split) out.push_back(&s);
    return out;
}

DatasetManifest build_dataset(const DatasetConfig& config,
                              const std::filesystem::path& output_dir, bool force) {
    FFMCT_CHECK_ARG(config.count >= 1, "build_dataset: count must be >= 1");
    FFMCT_CHECK_ARG(config.image_size >= 32 && (config.image_size & (config.image_size - 1)) == 0,
                    "build_dataset: image_size must be a power of two >= 32");

    const auto manifest_path = output_dir / "manifest.json";
    if (!force) {
        FFMCT_CHECK_ARG(!std::filesystem::exists(manifest_path),
                        "build_dataset: refusing to overwrite ", manifest_path.string(),
                        " (use force)");
    }

    int n_train = 0, n_val = 0, n_test = 0;
    split_counts(config.count, n_train, n_val, n_test);

    DatasetManifest manifest;
    manifest.config = config;
    manifest.root = output_dir;

    for (int i = 0; i < config.count; ++i) {
        const std::string split = i < n_train ? "train" : (i < n_train + n_val ? "val" : "test");
        char sid[16];
        std::snprintf(sid, sizeof(sid), "s%04d", i);

        const std::uint64_t phantom_seed =
            Rng::mix(config.seed, Rng::hash_tag("sample-phantom") + static_cast<std::uint64_t>(i));
        const std::uint64_t deform_seed =
            Rng::mix(config.seed, Rng::hash_tag("sample-deform") + static_cast<std::uint64_t>(i));
        const std::uint64_t noise_seed =
            Rng::mix(config.seed, Rng::hash_tag("sample-noise") + static_cast<std::uint64_t>(i));

        ImageGrid ndct = generate_phantom(phantom_seed, config.image_size);
        DeformationField field = make_deformation(deform_seed, config.image_size,
                                                  config.deform_max_px, config.deform_components);
        ImageGrid moved = deform(ndct, field);
        ImageGrid uldct = apply_noise(moved, config.noise, noise_seed);

        SampleRecord rec;
        rec.id = sid;
        rec.split = split;
        const std::string dir = "images/" + split + "/";
        rec.ndct = dir + rec.id + "_ndct.f32";
        rec.uldct = dir + rec.id + "_uldct.f32";
        rec.deformed = dir + rec.id + "_deformed.f32";

        std::error_code ec;
        std::filesystem::create_directories(output_dir / ("images/" + split), ec);
        FFMCT_CHECK_IO(!ec, "cannot create ", (output_dir / ("images/" + split)).string());
        write_image_raw(output_dir / rec.ndct, ndct, "ndct");
        write_image_raw(output_dir / rec.uldct, uldct, "uldct");
        write_image_raw(output_dir / rec.deformed, moved, "deformed");
        manifest.samples.push_back(std::move(rec));
    }

    save_manifest(manifest, manifest_path);
    return manifest;
}

void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& manifest_path) {
    nlohmann::json j;
    j["format"] = "ffmct-dataset-v1";
    j["seed"] = manifest.config.seed;
    j["count"] = manifest.config.count;
    j["image_size"] = manifest.config.image_size;
    j["deform_max_px"] = manifest.config.deform_max_px;
    j["deform_components"] = manifest.config.deform_components;
    j["noise"] = noise_to_json(manifest.config.noise);
    if (manifest.purify) j["purify"] = purify_to_json(*manifest.purify);
    nlohmann::json samples = nlohmann::json::array();
    for (const auto& s : manifest.samples) {
        nlohmann::json rec{{"id", s.id},
                           {"split", s.split},
                           {"ndct", s.ndct},
                           {"uldct", s.uldct},
                           {"deformed", s.deformed}};
        if (!s.ip_uldct.empty()) rec["ip_uldct"] = s.ip_uldct;
        if (!s.ip_ndct.empty()) rec["ip_ndct"] = s.ip_ndct;
        if (!s.cm.empty()) rec["cm"] = s.cm;
        samples.push_back(std::move(rec));
    }
    j["samples"] = std::move(samples);

    std::ofstream out(manifest_path, std::ios::trunc);
    FFMCT_CHECK_IO(out.good(), "cannot write manifest: ", manifest_path.string());
    out << j.dump(2) << "\n";
}

DatasetManifest load_manifest(const std::filesystem::path& manifest_path) {
    std::ifstream in(manifest_path);
    FFMCT_CHECK_IO(in.good(), "cannot open manifest: ", manifest_path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::io, "bad manifest ", manifest_path.string(), ": ", e.what());
    }
    FFMCT_CHECK_IO(j.value("format", "") == "ffmct-dataset-v1", "unknown manifest format in ",
                   manifest_path.string());

    DatasetManifest manifest;
    manifest.root = manifest_path.parent_path();
    manifest.config.seed = j.at("seed").get<std::uint64_t>();
    manifest.config.count = j.at("count").get<int>();
    manifest.config.image_size = j.at("image_size").get<int>();
    manifest.config.deform_max_px = j.at("deform_max_px").get<double>();
    manifest.config.deform_components = j.at("deform_components").get<int>();
    manifest.config.noise = noise_from_json(j.at("noise"));
    if (j.contains("purify")) manifest.purify = purify_from_json(j.at("purify"));

    for (const auto& rec : j.at("samples")) {
        SampleRecord s;
        s.id = rec.at("id").get<std::string>();
        s.split = rec.at("split").get<std::string>();
        FFMCT_CHECK_IO(s.split == "train" || s.split == "val" || s.split == "test",
                       "bad split tag '", s.split, "' in manifest");
        s.ndct = rec.at("ndct").get<std::string>();
        s.uldct = rec.at("uldct").get<std::string>();
        s.deformed = rec.at("deformed").get<std::string>();
        s.ip_uldct = rec.value("ip_uldct", "");
        s.ip_ndct = rec.value("ip_ndct", "");
        s.cm = rec.value("cm", "");
        for (const std::string* p : {&s.ndct, &s.uldct, &s.deformed}) {
            FFMCT_CHECK_IO(std::filesystem::exists(manifest.root / *p),
                           "missing dataset file: ", (manifest.root / *p).string());
        }
        manifest.samples.push_back(std::move(s));
    }
    return manifest;
}

}  // namespace ffmct
