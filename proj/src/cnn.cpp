#include "wirefit/cnn.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <functional>
#include <numeric>

#include "byte_io.hpp"
#include "wirefit/errors.hpp"

namespace wirefit {

namespace {

constexpr char kWeightMagic[4] = {'M', 'I', 'R', 'W'};

std::size_t element_count(const std::vector<std::uint32_t>& dims) {
    return std::accumulate(dims.begin(), dims.end(), std::size_t{1},
                           [](std::size_t a, std::uint32_t b) { return a * b; });
}

std::size_t layer_bytes(const LayerShape& s) {
    return 1 + 4 + 4 * s.dims.size() + 4 * element_count(s.dims) + 4 * s.dims.front();
}

// Feature map stored channel-major: [channel][row][col].
struct FeatureMap {
    std::size_t channels;
    std::size_t side;
    std::vector<float> values;

    float& at(std::size_t c, std::size_t r, std::size_t col) { return values[(c * side + r) * side + col]; }
    float at(std::size_t c, std::size_t r, std::size_t col) const { return values[(c * side + r) * side + col]; }
};

// 3x3 convolution, stride 1, zero padding 1, followed by ReLU.
FeatureMap conv3x3_relu(const FeatureMap& in, const LayerParams& layer) {
    const std::size_t out_ch = layer.dims[0];
    const std::size_t in_ch = layer.dims[1];
    const std::size_t n = in.side;
    FeatureMap out{out_ch, n, std::vector<float>(out_ch * n * n)};
    for (std::size_t o = 0; o < out_ch; ++o) {
        for (std::size_t r = 0; r < n; ++r) {
            for (std::size_t c = 0; c < n; ++c) {
                float acc = layer.bias[o];
                for (std::size_t i = 0; i < in_ch; ++i) {
                    const float* w = &layer.weights[((o * in_ch + i) * 3) * 3];
                    for (std::size_t ky = 0; ky < 3; ++ky) {
                        const std::ptrdiff_t rr = static_cast<std::ptrdiff_t>(r + ky) - 1;
                        if (rr < 0 || rr >= static_cast<std::ptrdiff_t>(n)) continue;
                        for (std::size_t kx = 0; kx < 3; ++kx) {
                            const std::ptrdiff_t cc = static_cast<std::ptrdiff_t>(c + kx) - 1;
                            if (cc < 0 || cc >= static_cast<std::ptrdiff_t>(n)) continue;
                            acc += w[ky * 3 + kx] * in.at(i, static_cast<std::size_t>(rr), static_cast<std::size_t>(cc));
                        }
                    }
                }
                out.at(o, r, c) = std::max(acc, 0.0f);
            }
        }
    }
    return out;
}

FeatureMap maxpool2(const FeatureMap& in) {
    const std::size_t n = in.side / 2;
    FeatureMap out{in.channels, n, std::vector<float>(in.channels * n * n)};
    for (std::size_t ch = 0; ch < in.channels; ++ch) {
        for (std::size_t r = 0; r < n; ++r) {
            for (std::size_t c = 0; c < n; ++c) {
                out.at(ch, r, c) = std::max({in.at(ch, 2 * r, 2 * c), in.at(ch, 2 * r, 2 * c + 1),
                                             in.at(ch, 2 * r + 1, 2 * c), in.at(ch, 2 * r + 1, 2 * c + 1)});
            }
        }
    }
    return out;
}

}  // namespace

std::vector<LayerShape> architecture(HeadKind head) {
    return {
        {LayerKind::Conv, {8, 1, 3, 3}},
        {LayerKind::Conv, {16, 8, 3, 3}},
        {LayerKind::Conv, {32, 16, 3, 3}},
        {LayerKind::Dense, {head == HeadKind::Regression ? 1u : 2u, 32}},
    };
}

WeightFile zero_weights(HeadKind head) {
    WeightFile w;
    w.head = head;
    for (const LayerShape& s : architecture(head)) {
        w.layers.push_back({s.kind, s.dims, std::vector<float>(element_count(s.dims), 0.0f),
                            std::vector<float>(s.dims.front(), 0.0f)});
    }
    return w;
}

void validate(const WeightFile& w) {
    if (w.version != kWeightFileVersion) {
        throw FormatError(FormatErrorKind::VersionMismatch, "weight file version " + std::to_string(w.version));
    }
    const auto shapes = architecture(w.head);
    if (w.layers.size() != shapes.size()) {
        throw FormatError(FormatErrorKind::ShapeMismatch, "expected " + std::to_string(shapes.size()) + " layers");
    }
    for (std::size_t i = 0; i < shapes.size(); ++i) {
        const LayerParams& l = w.layers[i];
        const LayerShape& s = shapes[i];
        if (l.kind != s.kind || l.dims != s.dims || l.weights.size() != element_count(s.dims) ||
            l.bias.size() != s.dims.front()) {
            throw FormatError(FormatErrorKind::ShapeMismatch, "layer " + std::to_string(i) + " does not match the architecture");
        }
        auto finite = [](float v) { return std::isfinite(v); };
        if (!std::all_of(l.weights.begin(), l.weights.end(), finite) ||
            !std::all_of(l.bias.begin(), l.bias.end(), finite)) {
            throw FormatError(FormatErrorKind::NonFinite, "layer " + std::to_string(i) + " has a non-finite parameter");
        }
    }
}

std::vector<std::uint8_t> encode_weights(const WeightFile& w) {
    validate(w);
    std::vector<std::uint8_t> out(std::begin(kWeightMagic), std::end(kWeightMagic));
    detail::put_u32(out, w.version);
    detail::put_u8(out, static_cast<std::uint8_t>(w.head));
    for (const LayerParams& l : w.layers) {
        detail::put_u8(out, static_cast<std::uint8_t>(l.kind));
        detail::put_u32(out, static_cast<std::uint32_t>(l.dims.size()));
        for (std::uint32_t d : l.dims) detail::put_u32(out, d);
        for (float v : l.weights) detail::put_f32(out, v);
        for (float v : l.bias) detail::put_f32(out, v);
    }
    return out;
}

WeightFile decode_weights(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 4 || std::memcmp(bytes.data(), kWeightMagic, 4) != 0) {
        throw FormatError(FormatErrorKind::BadMagic, "not a MIRW weight file");
    }
    WeightFile w;
    detail::ByteReader in(bytes.subspan(4));
    try {
        w.version = in.u32("version");
        if (w.version != kWeightFileVersion) {
            throw FormatError(FormatErrorKind::VersionMismatch, "weight file version " + std::to_string(w.version) +
                                                                    ", expected " + std::to_string(kWeightFileVersion));
        }
        const std::uint8_t head = in.u8("head");
        if (head > static_cast<std::uint8_t>(HeadKind::Classification)) {
            throw FormatError(FormatErrorKind::ShapeMismatch, "unknown head kind " + std::to_string(head));
        }
        w.head = static_cast<HeadKind>(head);
    } catch (const FormatError& e) {
        if (e.kind() != FormatErrorKind::Truncated) throw;
        throw FormatError(FormatErrorKind::ShapeMismatch, "weight file header is incomplete");
    }

    const auto shapes = architecture(w.head);
    std::size_t expected = 0;
    for (const LayerShape& s : shapes) expected += layer_bytes(s);
    if (in.remaining() != expected) {
        throw FormatError(FormatErrorKind::ShapeMismatch, "layer section is " + std::to_string(in.remaining()) +
                                                              " bytes, architecture needs " + std::to_string(expected));
    }
    for (const LayerShape& s : shapes) {
        LayerParams l;
        l.kind = static_cast<LayerKind>(in.u8("layer kind"));
        const std::uint32_t ndims = in.u32("layer rank");
        if (l.kind != s.kind || ndims != s.dims.size()) {
            throw FormatError(FormatErrorKind::ShapeMismatch, "layer kind or rank does not match the architecture");
        }
        for (std::uint32_t i = 0; i < ndims; ++i) l.dims.push_back(in.u32("layer dims"));
        if (l.dims != s.dims) {
            throw FormatError(FormatErrorKind::ShapeMismatch, "layer dimensions do not match the architecture");
        }
        l.weights.resize(element_count(l.dims));
        for (float& v : l.weights) v = in.f32("weights");
        l.bias.resize(l.dims.front());
        for (float& v : l.bias) v = in.f32("bias");
        w.layers.push_back(std::move(l));
    }
    validate(w);
    return w;
}

void save_weights(const WeightFile& w, const std::filesystem::path& path) {
    detail::dump(path, encode_weights(w));
}

WeightFile load_weights(const std::filesystem::path& path) { return decode_weights(detail::slurp(path)); }

std::vector<float> preprocess(const MfiImage& img) {
    const std::size_t n = img.size();
    const auto data = img.data();
    constexpr std::size_t m = kCnnInputSize;

    double maxabs = 0.0;
    for (float v : data) maxabs = std::max(maxabs, std::abs(static_cast<double>(v)));

    std::vector<float> out(m * m, 0.0f);
    if (maxabs == 0.0) return out;

    if (n == m) {
        for (std::size_t i = 0; i < m * m; ++i) out[i] = static_cast<float>(static_cast<double>(data[i]) / maxabs);
        return out;
    }

    const double ratio = static_cast<double>(n) / static_cast<double>(m);
    auto source_coord = [&](std::size_t dst, std::size_t& lo, std::size_t& hi, double& frac) {
        const double s = std::clamp((static_cast<double>(dst) + 0.5) * ratio - 0.5, 0.0, static_cast<double>(n - 1));
        lo = static_cast<std::size_t>(std::floor(s));
        hi = std::min(lo + 1, n - 1);
        frac = s - static_cast<double>(lo);
    };
    for (std::size_t r = 0; r < m; ++r) {
        std::size_t r0, r1;
        double fr;
        source_coord(r, r0, r1, fr);
        for (std::size_t c = 0; c < m; ++c) {
            std::size_t c0, c1;
            double fc;
            source_coord(c, c0, c1, fc);
            const double top = (1.0 - fc) * data[r0 * n + c0] + fc * data[r0 * n + c1];
            const double bottom = (1.0 - fc) * data[r1 * n + c0] + fc * data[r1 * n + c1];
            out[r * m + c] = static_cast<float>(((1.0 - fr) * top + fr * bottom) / maxabs);
        }
    }
    return out;
}

std::vector<float> forward(const WeightFile& w, std::span<const float> tensor) {
    validate(w);
    if (tensor.size() != kCnnInputSize * kCnnInputSize) {
        throw InvalidArgument("network input must be a 64x64 tensor");
    }
    FeatureMap x{1, kCnnInputSize, std::vector<float>(tensor.begin(), tensor.end())};
    for (std::size_t i = 0; i < 3; ++i) x = maxpool2(conv3x3_relu(x, w.layers[i]));

    std::vector<float> pooled(x.channels, 0.0f);
    const std::size_t area = x.side * x.side;
    for (std::size_t ch = 0; ch < x.channels; ++ch) {
        float sum = 0.0f;
        for (std::size_t j = 0; j < area; ++j) sum += x.values[ch * area + j];
        pooled[ch] = sum / static_cast<float>(area);
    }

    const LayerParams& dense = w.layers[3];
    const std::size_t outputs = dense.dims[0];
    const std::size_t inputs = dense.dims[1];
    std::vector<float> y(outputs);
    for (std::size_t k = 0; k < outputs; ++k) {
        float acc = dense.bias[k];
        for (std::size_t j = 0; j < inputs; ++j) acc += dense.weights[k * inputs + j] * pooled[j];
        y[k] = acc;
    }
    return y;
}

double infer_beta(const WeightFile& w, const MfiImage& img) {
    if (w.head != HeadKind::Regression) {
        throw InvalidArgument("infer_beta needs a regression-head weight file");
    }
    const auto y = forward(w, preprocess(img));
    return std::clamp(static_cast<double>(y[0]), kBetaClampMin, kBetaClampMax);
}

AxisPrediction infer_axis(const WeightFile& w, const MfiImage& img) {
    if (w.head != HeadKind::Classification) {
        throw InvalidArgument("infer_axis needs a classification-head weight file");
    }
    const auto y = forward(w, preprocess(img));
    const double top = std::max<double>(y[0], y[1]);
    const double ex = std::exp(static_cast<double>(y[0]) - top);
    const double ey = std::exp(static_cast<double>(y[1]) - top);
    AxisPrediction p;
    p.probabilities = {ex / (ex + ey), ey / (ex + ey)};
    p.axis = p.probabilities[0] >= p.probabilities[1] ? Axis::X : Axis::Y;
    p.confidence = std::max(p.probabilities[0], p.probabilities[1]);
    return p;
}

NeuralBetaEstimator::NeuralBetaEstimator(WeightFile regression, std::optional<WeightFile> classification)
    : regression_(std::move(regression)), classification_(std::move(classification)) {
    validate(regression_);
    if (regression_.head != HeadKind::Regression) {
        throw InvalidArgument("beta weights must use the regression head");
    }
    if (classification_) {
        validate(*classification_);
        if (classification_->head != HeadKind::Classification) {
            throw InvalidArgument("axis weights must use the classification head");
        }
    }
}

BetaAxis NeuralBetaEstimator::estimate(const MfiImage& img) const {
    const double beta = infer_beta(regression_, img);
    const Axis axis = classification_ ? infer_axis(*classification_, img).axis : classify_axis_analytic(img);
    return {beta, axis};
}

}  // namespace wirefit
