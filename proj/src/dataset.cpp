#include "wirefit/dataset.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "wirefit/errors.hpp"

namespace wirefit {

namespace {

constexpr const char* kManifestHeader =
    "file\tsplit\taxis\tx0_um\ty0_um\tz0_um\tlength_um\tcurrent_a\tsigma_t\ttarget_snr";

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

double uniform(std::mt19937_64& rng, Range r) {
    // Hand-rolled so the draw does not depend on the standard library's
    // uniform_real_distribution.
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return r.lo + (r.hi - r.lo) * u;
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double parse_double(const std::string& text, std::size_t line) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != text.size()) {
        throw InvalidArgument("manifest line " + std::to_string(line) + ": bad number '" + text + "'");
    }
    return v;
}

}  // namespace

std::string_view to_string(Split split) {
    switch (split) {
        case Split::Train: return "train";
        case Split::Val: return "val";
        case Split::Test: return "test";
    }
    return "train";
}

Split split_from_string(std::string_view text) {
    if (text == "train") return Split::Train;
    if (text == "val") return Split::Val;
    if (text == "test") return Split::Test;
    throw InvalidArgument("unknown split '" + std::string(text) + "'");
}

void DatasetSpec::validate() const {
    if (train + val + test == 0) throw InvalidArgument("dataset needs at least one image");
    auto check = [](Range r, const char* name, bool positive) {
        if (!(r.lo <= r.hi) || !std::isfinite(r.lo) || !std::isfinite(r.hi)) {
            throw InvalidArgument(std::string("range ") + name + " must satisfy lo <= hi");
        }
        if (positive && !(r.lo > 0.0)) throw InvalidArgument(std::string("range ") + name + " must be positive");
    };
    check(z0, "z0", true);
    check(beta, "beta", true);
    check(current, "current", true);
    check(snr, "snr", true);
    check(centre, "centre", false);
    if (image_size < kMinImageSize) throw InvalidArgument("image size too small");
}

GeneratedImage generate_one(const DatasetSpec& spec, Split split, std::size_t index) {
    const std::uint64_t stream = (static_cast<std::uint64_t>(split) << 40) ^ static_cast<std::uint64_t>(index);
    std::mt19937_64 rng(splitmix64(spec.seed ^ splitmix64(stream)));

    const Axis axis = index % 2 == 0 ? Axis::X : Axis::Y;
    const double sign = (index / 2) % 2 == 0 ? 1.0 : -1.0;
    const double z0 = uniform(rng, spec.z0);
    const double length = uniform(rng, spec.beta) * z0;
    const double current = sign * uniform(rng, spec.current);
    const FieldPoint centre{uniform(rng, spec.centre), uniform(rng, spec.centre)};
    const double x0 = axis == Axis::X ? centre.x - 0.5 * length : centre.x;
    const double y0 = axis == Axis::Y ? centre.y - 0.5 * length : centre.y;
    const SegmentParams truth(x0, y0, z0, length, current, axis);

    FrameGeometry frame = default_frame(truth, spec.image_size);
    // Shift the frame by up to 1/16 of its span so the segment is not always
    // centred on the pixel lattice.
    const double span = frame.pitch * static_cast<double>(frame.size);
    frame.origin.x += uniform(rng, {-span / 16.0, span / 16.0});
    frame.origin.y += uniform(rng, {-span / 16.0, span / 16.0});

    double target_snr = 0.0;
    if (!spec.noiseless) {
        target_snr = spec.snr_log_uniform
                         ? std::exp(uniform(rng, {std::log(spec.snr.lo), std::log(spec.snr.hi)}))
                         : uniform(rng, spec.snr);
    }
    const std::uint64_t noise_seed = rng();

    MfiImage image = render(truth, frame);
    double sigma = 0.0;
    if (!spec.noiseless) {
        const ExtremaReport ext = find_extrema(image);
        sigma = (ext.max_val - ext.min_val) / (2.0 * target_snr);
        image = add_noise(image, sigma, noise_seed);
    }

    char name[64];
    std::snprintf(name, sizeof name, "%s_%05zu.mfi", std::string(to_string(split)).c_str(), index);
    return {ManifestRecord{name, split, truth, sigma, target_snr}, std::move(image)};
}

std::vector<ManifestRecord> generate_dataset(const DatasetSpec& spec, const std::filesystem::path& out_dir) {
    spec.validate();
    std::filesystem::create_directories(out_dir);
    std::vector<ManifestRecord> records;
    records.reserve(spec.train + spec.val + spec.test);
    for (auto [split, count] : {std::pair{Split::Train, spec.train}, std::pair{Split::Val, spec.val},
                                std::pair{Split::Test, spec.test}}) {
        for (std::size_t i = 0; i < count; ++i) {
            GeneratedImage g = generate_one(spec, split, i);
            write_mfi(g.image, out_dir / g.record.file);
            records.push_back(std::move(g.record));
        }
    }
    write_manifest(records, out_dir / kManifestName);
    return records;
}

void write_manifest(const std::vector<ManifestRecord>& records, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write manifest " + path.string());
    out << kManifestHeader << '\n';
    for (const ManifestRecord& r : records) {
        out << r.file << '\t' << to_string(r.split) << '\t' << to_string(r.truth.axis) << '\t'
            << format_double(r.truth.x0) << '\t' << format_double(r.truth.y0) << '\t' << format_double(r.truth.z0)
            << '\t' << format_double(r.truth.length) << '\t' << format_double(r.truth.current) << '\t'
            << format_double(r.sigma) << '\t' << format_double(r.target_snr) << '\n';
    }
    if (!out) throw Error("failed writing manifest " + path.string());
}

std::vector<ManifestRecord> read_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open manifest " + path.string());
    std::string line;
    if (!std::getline(in, line) || line != kManifestHeader) {
        throw InvalidArgument("manifest " + path.string() + " has an unexpected header row");
    }
    std::vector<ManifestRecord> records;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string> cols;
        std::stringstream ss(line);
        std::string col;
        while (std::getline(ss, col, '\t')) cols.push_back(col);
        if (cols.size() != 10) {
            throw InvalidArgument("manifest line " + std::to_string(line_no) + " has " + std::to_string(cols.size()) +
                                  " columns, expected 10");
        }
        ManifestRecord r;
        r.file = cols[0];
        r.split = split_from_string(cols[1]);
        r.truth = SegmentParams(parse_double(cols[3], line_no), parse_double(cols[4], line_no),
                                parse_double(cols[5], line_no), parse_double(cols[6], line_no),
                                parse_double(cols[7], line_no), axis_from_string(cols[2]));
        r.sigma = parse_double(cols[8], line_no);
        r.target_snr = parse_double(cols[9], line_no);
        records.push_back(std::move(r));
    }
    return records;
}

}  // namespace wirefit
