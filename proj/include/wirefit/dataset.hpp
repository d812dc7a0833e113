#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "wirefit/field.hpp"
#include "wirefit/image.hpp"

namespace wirefit {

struct Range {
    double lo = 0.0;
    double hi = 0.0;
};

enum class Split { Train, Val, Test };

std::string_view to_string(Split split);
Split split_from_string(std::string_view text);

/// Synthetic dataset description. Axis alternates and the current sign
/// alternates in pairs within each split, so both are balanced.
struct DatasetSpec {
    std::size_t train = 5000;
    std::size_t val = 600;
    std::size_t test = 500;
    Range z0{50.0, 500.0};        // um
    Range beta{0.5, 20.0};        // length = beta * z0
    Range current{0.1, 5.0};      // |I|, A
    Range snr{3.0, 100.0};        // target S/N, noise sigma derived from it
    bool snr_log_uniform = true;  // sample S/N uniformly in log space
    bool noiseless = false;
    Range centre{-2000.0, 2000.0};  // segment midpoint, each coordinate, um
    std::size_t image_size = kDefaultImageSize;
    std::uint64_t seed = 1;

    // Throws InvalidArgument on an empty dataset or inverted ranges.
    void validate() const;
};

struct ManifestRecord {
    std::string file;  // relative to the manifest directory
    Split split = Split::Train;
    SegmentParams truth;
    double sigma = 0.0;       // injected noise, T
    double target_snr = 0.0;  // 0 when noiseless
};

/// Draws the ground truth and image for dataset entry `index` of `split`.
/// Pure function of (spec, split, index).
struct GeneratedImage {
    ManifestRecord record;
    MfiImage image;
};
GeneratedImage generate_one(const DatasetSpec& spec, Split split, std::size_t index);

inline constexpr const char* kManifestName = "manifest.tsv";

/// Writes every image plus manifest.tsv into `out_dir`; returns the records.
std::vector<ManifestRecord> generate_dataset(const DatasetSpec& spec, const std::filesystem::path& out_dir);

void write_manifest(const std::vector<ManifestRecord>& records, const std::filesystem::path& path);
std::vector<ManifestRecord> read_manifest(const std::filesystem::path& path);

}  // namespace wirefit
