#include "wirefit/image.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <random>

#include "byte_io.hpp"
#include "wirefit/errors.hpp"

namespace wirefit {

namespace {

constexpr char kMfiMagic[4] = {'M', 'F', 'I', '1'};
constexpr std::size_t kMfiHeaderBytes = 4 + 4 + 4 * 8;
// Guards the size field against absurd allocations from corrupt headers.
constexpr std::uint32_t kMaxImageSize = 1u << 14;

void validate_frame(const FrameGeometry& frame) {
    if (frame.size < kMinImageSize) {
        throw InvalidArgument("image size must be at least " + std::to_string(kMinImageSize));
    }
    if (!(frame.pitch > 0.0) || !std::isfinite(frame.pitch)) {
        throw InvalidArgument("pixel pitch must be positive and finite");
    }
    if (!std::isfinite(frame.origin.x) || !std::isfinite(frame.origin.y)) {
        throw InvalidArgument("image origin must be finite");
    }
}

}  // namespace

MfiImage::MfiImage(FrameGeometry frame, std::vector<float> data, double noise_sigma)
    : frame_(frame), data_(std::move(data)), noise_sigma_(noise_sigma) {
    validate_frame(frame_);
    if (data_.size() != frame_.size * frame_.size) {
        throw InvalidArgument("image payload holds " + std::to_string(data_.size()) +
                              " values, expected " + std::to_string(frame_.size * frame_.size));
    }
    if (!std::all_of(data_.begin(), data_.end(), [](float v) { return std::isfinite(v); })) {
        throw InvalidArgument("image payload contains non-finite values");
    }
    if (!(noise_sigma_ >= 0.0) || !std::isfinite(noise_sigma_)) {
        throw InvalidArgument("noise sigma must be finite and non-negative");
    }
}

MfiImage MfiImage::with_data(std::vector<float> data, double noise_sigma) const {
    return MfiImage(frame_, std::move(data), noise_sigma);
}

FrameGeometry default_frame(const SegmentParams& seg, std::size_t size) {
    const double span = std::max(6.0 * pp_distance(seg.length, seg.z0), seg.length + 6.0 * seg.z0);
    FieldPoint centre = seg.axis == Axis::X ? FieldPoint{seg.x0 + 0.5 * seg.length, seg.y0}
                                            : FieldPoint{seg.x0, seg.y0 + 0.5 * seg.length};
    const double pitch = span / static_cast<double>(size);
    const double half = 0.5 * static_cast<double>(size - 1) * pitch;
    return {size, pitch, {centre.x - half, centre.y - half}};
}

MfiImage render(const SegmentParams& seg, const FrameGeometry& frame) {
    validate_frame(frame);
    std::vector<float> data(frame.size * frame.size);
    for (std::size_t r = 0; r < frame.size; ++r) {
        for (std::size_t c = 0; c < frame.size; ++c) {
            data[r * frame.size + c] = static_cast<float>(bz_at(seg, frame.position(r, c)));
        }
    }
    return MfiImage(frame, std::move(data), 0.0);
}

MfiImage render(const SegmentParams& seg, std::size_t size, double pitch, FieldPoint origin) {
    return render(seg, FrameGeometry{size, pitch, origin});
}

MfiImage add_noise(const MfiImage& img, double sigma, std::uint64_t seed) {
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
        throw InvalidArgument("noise sigma must be non-negative");
    }
    if (sigma == 0.0) return img;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, sigma);
    std::vector<float> data(img.data().begin(), img.data().end());
    for (float& v : data) {
        v = static_cast<float>(static_cast<double>(v) + gauss(rng));
    }
    return img.with_data(std::move(data), sigma);
}

ExtremaReport find_extrema(const MfiImage& img) {
    const auto data = img.data();
    std::size_t imax = 0;
    std::size_t imin = 0;
    // Row-major scan with strict comparisons keeps the first (lowest row, then
    // lowest column) occurrence.
    for (std::size_t i = 1; i < data.size(); ++i) {
        if (data[i] > data[imax]) imax = i;
        if (data[i] < data[imin]) imin = i;
    }
    const std::size_t n = img.size();
    return {img.position(imax / n, imax % n), img.position(imin / n, imin % n),
            static_cast<double>(data[imax]), static_cast<double>(data[imin])};
}

namespace {

// Flood fill (4-connected) from `seed` over pixels whose signed value is at
// least half the seed value; returns the value-weighted centroid.
FieldPoint lobe_centroid(const MfiImage& img, std::size_t seed, double sign) {
    const std::size_t n = img.size();
    const auto data = img.data();
    const double threshold = 0.5 * sign * static_cast<double>(data[seed]);
    std::vector<std::uint8_t> seen(data.size(), 0);
    std::vector<std::size_t> stack{seed};
    seen[seed] = 1;
    double wsum = 0.0;
    double xsum = 0.0;
    double ysum = 0.0;
    while (!stack.empty()) {
        const std::size_t i = stack.back();
        stack.pop_back();
        const std::size_t r = i / n;
        const std::size_t c = i % n;
        const double w = sign * static_cast<double>(data[i]);
        const FieldPoint p = img.position(r, c);
        wsum += w;
        xsum += w * p.x;
        ysum += w * p.y;
        auto visit = [&](std::size_t j) {
            if (!seen[j] && sign * static_cast<double>(data[j]) >= threshold) {
                seen[j] = 1;
                stack.push_back(j);
            }
        };
        if (r > 0) visit(i - n);
        if (r + 1 < n) visit(i + n);
        if (c > 0) visit(i - 1);
        if (c + 1 < n) visit(i + 1);
    }
    return {xsum / wsum, ysum / wsum};
}

}  // namespace

LobeReport find_lobes(const MfiImage& img) {
    const auto data = img.data();
    const auto max_it = std::max_element(data.begin(), data.end());
    const auto min_it = std::min_element(data.begin(), data.end());
    if (!(*max_it > 0.0f) || !(*min_it < 0.0f)) {
        throw ClassificationFailure("image does not contain both a positive and a negative lobe");
    }
    const auto imax = static_cast<std::size_t>(max_it - data.begin());
    const auto imin = static_cast<std::size_t>(min_it - data.begin());
    return {lobe_centroid(img, imax, 1.0), lobe_centroid(img, imin, -1.0)};
}

double snr(const MfiImage& img) {
    if (!(img.noise_sigma() > 0.0)) {
        throw UndefinedSnr("S/N is undefined for an image without a recorded noise sigma");
    }
    const ExtremaReport ext = find_extrema(img);
    return (ext.max_val - ext.min_val) / (2.0 * img.noise_sigma());
}

std::vector<std::uint8_t> encode_mfi(const MfiImage& img) {
    std::vector<std::uint8_t> out;
    out.reserve(kMfiHeaderBytes + 4 * img.data().size());
    out.insert(out.end(), std::begin(kMfiMagic), std::end(kMfiMagic));
    detail::put_u32(out, static_cast<std::uint32_t>(img.size()));
    detail::put_f64(out, img.pitch());
    detail::put_f64(out, img.origin().x);
    detail::put_f64(out, img.origin().y);
    detail::put_f64(out, img.noise_sigma());
    for (float v : img.data()) detail::put_f32(out, v);
    return out;
}

MfiImage decode_mfi(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 4 || std::memcmp(bytes.data(), kMfiMagic, 4) != 0) {
        throw FormatError(FormatErrorKind::BadMagic, "not an MFI1 file");
    }
    detail::ByteReader in(bytes.subspan(4));
    const std::uint32_t size = in.u32("image size");
    FrameGeometry frame;
    frame.size = size;
    frame.pitch = in.f64("pitch");
    frame.origin.x = in.f64("origin x");
    frame.origin.y = in.f64("origin y");
    const double sigma = in.f64("noise sigma");
    if (size < kMinImageSize || size > kMaxImageSize) {
        throw FormatError(FormatErrorKind::SizeMismatch, "declared image size " + std::to_string(size) + " is out of range");
    }
    const std::size_t count = static_cast<std::size_t>(size) * size;
    if (in.remaining() < 4 * count) {
        throw FormatError(FormatErrorKind::Truncated, "payload holds " + std::to_string(in.remaining() / 4) +
                                                          " values, expected " + std::to_string(count));
    }
    if (in.remaining() > 4 * count) {
        throw FormatError(FormatErrorKind::SizeMismatch, "payload longer than declared size^2 values");
    }
    std::vector<float> data(count);
    for (float& v : data) v = in.f32("payload");
    try {
        return MfiImage(frame, std::move(data), sigma);
    } catch (const InvalidArgument& e) {
        throw FormatError(FormatErrorKind::NonFinite, e.what());
    }
}

void write_mfi(const MfiImage& img, std::ostream& out) {
    const auto bytes = encode_mfi(img);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw FormatError(FormatErrorKind::Io, "stream write failed");
}

void write_mfi(const MfiImage& img, const std::filesystem::path& path) {
    detail::dump(path, encode_mfi(img));
}

MfiImage read_mfi(std::istream& in) { return decode_mfi(detail::slurp(in)); }

MfiImage read_mfi(const std::filesystem::path& path) { return decode_mfi(detail::slurp(path)); }

std::vector<std::uint8_t> encode_pgm(const MfiImage& img) {
    const std::size_t n = img.size();
    const std::string header = "P5\n" + std::to_string(n) + " " + std::to_string(n) + "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    const ExtremaReport ext = find_extrema(img);
    const double range = ext.max_val - ext.min_val;
    for (float v : img.data()) {
        if (range > 0.0) {
            const double t = (static_cast<double>(v) - ext.min_val) / range;
            out.push_back(static_cast<std::uint8_t>(std::lround(std::clamp(t, 0.0, 1.0) * 255.0)));
        } else {
            out.push_back(128);
        }
    }
    return out;
}

void export_heatmap(const MfiImage& img, const std::filesystem::path& path) {
    detail::dump(path, encode_pgm(img));
}

}  // namespace wirefit
