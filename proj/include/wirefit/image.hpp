#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "wirefit/field.hpp"

namespace wirefit {

inline constexpr std::size_t kMinImageSize = 8;
inline constexpr std::size_t kDefaultImageSize = 64;

/// Pixel lattice of an image: `size` x `size` pixel centres spaced `pitch`
/// apart, pixel (0, 0) centred at `origin`.
struct FrameGeometry {
    std::size_t size = kDefaultImageSize;
    double pitch = 1.0;
    FieldPoint origin{};

    friend bool operator==(const FrameGeometry&, const FrameGeometry&) = default;

    FieldPoint position(std::size_t row, std::size_t col) const {
        return {origin.x + static_cast<double>(col) * pitch,
                origin.y + static_cast<double>(row) * pitch};
    }
};

/// A square Bz image. Row index is y, column index is x. Immutable once built.
class MfiImage {
public:
    MfiImage(FrameGeometry frame, std::vector<float> data, double noise_sigma = 0.0);

    std::size_t size() const { return frame_.size; }
    double pitch() const { return frame_.pitch; }
    FieldPoint origin() const { return frame_.origin; }
    const FrameGeometry& frame() const { return frame_; }
    double noise_sigma() const { return noise_sigma_; }
    std::span<const float> data() const { return data_; }

    float at(std::size_t row, std::size_t col) const { return data_[row * frame_.size + col]; }
    FieldPoint position(std::size_t row, std::size_t col) const { return frame_.position(row, col); }

    // Same geometry, new payload.
    MfiImage with_data(std::vector<float> data, double noise_sigma) const;

    friend bool operator==(const MfiImage&, const MfiImage&) = default;

private:
    FrameGeometry frame_;
    std::vector<float> data_;
    double noise_sigma_ = 0.0;
};

struct ExtremaReport {
    FieldPoint max_pos;
    FieldPoint min_pos;
    double max_val = 0.0;
    double min_val = 0.0;
};

/// Value-weighted centroids of the connected positive and negative lobes
/// around the extremum pixels (pixels beyond half the extremum value).
struct LobeReport {
    FieldPoint max_centroid;
    FieldPoint min_centroid;
};

/// Frame centred on the segment midpoint, spanning max(6 PP, length + 6 z0).
FrameGeometry default_frame(const SegmentParams& seg, std::size_t size = kDefaultImageSize);

MfiImage render(const SegmentParams& seg, const FrameGeometry& frame);
MfiImage render(const SegmentParams& seg, std::size_t size, double pitch, FieldPoint origin);

/// Adds i.i.d. N(0, sigma^2) to every pixel; deterministic in `seed`.
MfiImage add_noise(const MfiImage& img, double sigma, std::uint64_t seed);

/// Argmax / argmin pixels; ties go to the lowest row, then the lowest column.
ExtremaReport find_extrema(const MfiImage& img);

/// Throws ClassificationFailure when either lobe is missing.
LobeReport find_lobes(const MfiImage& img);

/// Half the peak-to-peak amplitude over the recorded noise sigma.
double snr(const MfiImage& img);

// .mfi: "MFI1" | u32 size | f64 pitch | f64 origin_x | f64 origin_y |
//       f64 noise_sigma | size^2 f32 row-major, all little-endian.
std::vector<std::uint8_t> encode_mfi(const MfiImage& img);
MfiImage decode_mfi(std::span<const std::uint8_t> bytes);
void write_mfi(const MfiImage& img, std::ostream& out);
void write_mfi(const MfiImage& img, const std::filesystem::path& path);
MfiImage read_mfi(std::istream& in);
MfiImage read_mfi(const std::filesystem::path& path);

/// Binary PGM (P5), [min, max] mapped linearly onto [0, 255]; a constant
/// image maps to 128.
std::vector<std::uint8_t> encode_pgm(const MfiImage& img);
void export_heatmap(const MfiImage& img, const std::filesystem::path& path);

}  // namespace wirefit
