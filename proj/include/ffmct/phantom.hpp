#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ffmct/image.hpp"
#include "ffmct/purify.hpp"

namespace ffmct {

// Smooth band-limited per-pixel displacement in pixel units.
struct DeformationField {
    int width = 0;
    int height = 0;
    std::vector<float> dx;
    std::vector<float> dy;
    double max_magnitude = 0.0;

    bool zero() const { return dx.empty(); }
};

// Signal-dependent photon-counting noise plus additive electronic noise.
// Values in [0,1] are treated as normalized attenuation; attenuation_mu maps
// them to line integrals before the photon model. Poisson counts are sampled
// exactly below 30 expected photons and by a matched Gaussian above, which is
// the documented approximation.
struct NoiseModel {
    double dose_fraction = 0.02;
    double photon_scale = 1.0e4;    // expected photons through air at full dose
    double electronic_sigma = 15.0; // additive detector noise, in counts
    double attenuation_mu = 4.0;
};

// One aligned record of the synthetic dataset. Paths are relative to the
// manifest directory. Purification fills the ip_* / cm entries.
struct SampleRecord {
    std::string id;
    std::string split;  // train | val | test
    std::string ndct;
    std::string uldct;
    std::string deformed;  // noiseless deformed phantom, kept for analysis
    std::string ip_uldct;
    std::string ip_ndct;
    std::string cm;
};

struct DatasetConfig {
    std::uint64_t seed = 42;
    int count = 10;
    int image_size = 64;  // power of two
    double deform_max_px = 3.0;
    int deform_components = 4;
    NoiseModel noise;
};

struct DatasetManifest {
    DatasetConfig config;
    std::vector<SampleRecord> samples;
    std::optional<PurifySettings> purify;
    std::filesystem::path root;  // directory holding the manifest (not serialized)

    std::vector<const SampleRecord*> split_samples(const std::string& split) const;
    std::filesystem::path resolve(const std::string& relative) const { return root / relative; }
};

// Stylized chest slice: a jittered family anatomy (body outline, two lung
// fields, spine) plus 3..11 random internal structures and a low-frequency
// background -- 5 to 15 soft-edged ellipses total, clipped to [0,1].
// Deterministic in (seed, size).
ImageGrid generate_phantom(std::uint64_t seed, int size);

// Sum of up to `components` low-frequency sinusoidal displacement fields,
// rescaled so the largest displacement magnitude equals max_px.
DeformationField make_deformation(std::uint64_t seed, int size, double max_px,
                                  int components = 4);

// Bilinear backward warp with replicated borders.
ImageGrid deform(const ImageGrid& img, const DeformationField& field);

ImageGrid apply_noise(const ImageGrid& img, const NoiseModel& model, std::uint64_t seed);

// 7:1.5:1.5 split with round-half-away-from-zero on the train and val
// counts; test takes the remainder.
void split_counts(int total, int& train, int& val, int& test);

// Writes every sample (NDCT, uLDCT, and the noiseless deformed intermediate)
// plus manifest.json under output_dir. Refuses to overwrite an existing
// manifest unless force is set.
DatasetManifest build_dataset(const DatasetConfig& config,
                              const std::filesystem::path& output_dir, bool force = false);

DatasetManifest load_manifest(const std::filesystem::path& manifest_path);
void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& manifest_path);

}  // namespace ffmct
