#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "wirefit/estimate.hpp"
#include "wirefit/image.hpp"

namespace wirefit {

// Small fixed CNN used for beta regression and axis classification:
//
//   input 1x64x64
//   conv3x3( 1 ->  8, pad 1) ReLU maxpool2  -> 8x32x32
//   conv3x3( 8 -> 16, pad 1) ReLU maxpool2  -> 16x16x16
//   conv3x3(16 -> 32, pad 1) ReLU maxpool2  -> 32x8x8
//   global average pool                     -> 32
//   dense 32 -> 1 (regression) | dense 32 -> 2 + softmax (classification)
//
// .mirw layout (little-endian):
//   "MIRW" | u32 version | u8 head
//   per layer, in forward order:
//     u8 kind | u32 ndims | u32 dims[ndims] | f32 weights[prod(dims)] | f32 bias[dims[0]]
//   conv weights are [out, in, kh, kw], dense weights [out, in].

inline constexpr std::size_t kCnnInputSize = 64;
inline constexpr std::uint32_t kWeightFileVersion = 1;
inline constexpr double kBetaClampMin = 0.05;
inline constexpr double kBetaClampMax = 100.0;

enum class HeadKind : std::uint8_t { Regression = 0, Classification = 1 };
enum class LayerKind : std::uint8_t { Conv = 1, Dense = 2 };

struct LayerParams {
    LayerKind kind = LayerKind::Conv;
    std::vector<std::uint32_t> dims;
    std::vector<float> weights;
    std::vector<float> bias;

    friend bool operator==(const LayerParams&, const LayerParams&) = default;
};

struct WeightFile {
    std::uint32_t version = kWeightFileVersion;
    HeadKind head = HeadKind::Regression;
    std::vector<LayerParams> layers;

    friend bool operator==(const WeightFile&, const WeightFile&) = default;
};

struct LayerShape {
    LayerKind kind;
    std::vector<std::uint32_t> dims;
};

/// Layer shapes the architecture requires for the given head.
std::vector<LayerShape> architecture(HeadKind head);

/// Zero-initialised weights with the exact architecture shapes.
WeightFile zero_weights(HeadKind head);

/// Throws FormatError(ShapeMismatch / NonFinite) unless `w` matches the
/// architecture exactly.
void validate(const WeightFile& w);

std::vector<std::uint8_t> encode_weights(const WeightFile& w);
WeightFile decode_weights(std::span<const std::uint8_t> bytes);
void save_weights(const WeightFile& w, const std::filesystem::path& path);
WeightFile load_weights(const std::filesystem::path& path);

/// 64x64 f32 tensor: bilinear resample (half-pixel centres, edge clamped)
/// when the image is not 64x64, then division by max |data|. An all-zero
/// image yields an all-zero tensor.
std::vector<float> preprocess(const MfiImage& img);

/// Raw network output(s) for a preprocessed tensor.
std::vector<float> forward(const WeightFile& w, std::span<const float> tensor);

/// Regression head output clamped to [kBetaClampMin, kBetaClampMax].
double infer_beta(const WeightFile& w, const MfiImage& img);

struct AxisPrediction {
    Axis axis = Axis::X;
    double confidence = 0.5;
    std::array<double, 2> probabilities{0.5, 0.5};  // [X, Y]
};

AxisPrediction infer_axis(const WeightFile& w, const MfiImage& img);

/// BetaEstimator backed by the CNN. A missing classifier falls back to the
/// analytic axis rule.
class NeuralBetaEstimator final : public BetaEstimator {
public:
    NeuralBetaEstimator(WeightFile regression, std::optional<WeightFile> classification);

    BetaAxis estimate(const MfiImage& img) const override;
    EstimateSource source() const override { return EstimateSource::Neural; }

private:
    WeightFile regression_;
    std::optional<WeightFile> classification_;
};

}  // namespace wirefit
