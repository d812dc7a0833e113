#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "wirefit/errors.hpp"
#include "wirefit/image.hpp"

using namespace wirefit;

namespace {

MfiImage constant_image(float value, std::size_t n = 16) {
    return MfiImage(FrameGeometry{n, 2.0, {-10.0, 5.0}}, std::vector<float>(n * n, value));
}

FormatErrorKind decode_error(const std::vector<std::uint8_t>& bytes) {
    try {
        decode_mfi(bytes);
    } catch (const FormatError& e) {
        return e.kind();
    }
    FAIL("decode succeeded");
    return FormatErrorKind::Io;
}

}  // namespace

TEST_CASE("image construction validates its invariants") {
    CHECK_THROWS_AS(MfiImage(FrameGeometry{4, 1.0, {}}, std::vector<float>(16)), InvalidArgument);
    CHECK_THROWS_AS(MfiImage(FrameGeometry{8, 0.0, {}}, std::vector<float>(64)), InvalidArgument);
    CHECK_THROWS_AS(MfiImage(FrameGeometry{8, 1.0, {}}, std::vector<float>(63)), InvalidArgument);
    std::vector<float> bad(64, 0.0f);
    bad[3] = NAN;
    CHECK_THROWS_AS(MfiImage(FrameGeometry{8, 1.0, {}}, bad), InvalidArgument);
}

TEST_CASE("render samples bz at pixel centres") {
    const SegmentParams seg(-150.0, 20.0, 100.0, 300.0, 1.5, Axis::X);
    const MfiImage img = render(seg, 16, 25.0, {-200.0, -180.0});
    CHECK(img.noise_sigma() == 0.0);
    CHECK(img.at(3, 7) == static_cast<float>(bz_at(seg, {-200.0 + 7 * 25.0, -180.0 + 3 * 25.0})));
    CHECK(img.at(15, 0) == static_cast<float>(bz_at(seg, {-200.0, -180.0 + 15 * 25.0})));
}

TEST_CASE("centred x segment renders antisymmetric across its row") {
    const SegmentParams seg(-200.0, 0.0, 100.0, 400.0, 2.0, Axis::X);
    const MfiImage img = render(seg, default_frame(seg));
    const std::size_t n = img.size();
    // y0 sits midway between rows n/2 - 1 and n/2.
    for (std::size_t r = 0; r < n / 2; ++r) {
        for (std::size_t c = 0; c < n; ++c) {
            CHECK(img.at(r, c) == doctest::Approx(-img.at(n - 1 - r, c)).epsilon(1e-5));
        }
    }
}

TEST_CASE("rendered extrema are separated by the PP distance") {
    for (double beta : {0.5, 1.0, 4.0, 12.0, 20.0}) {
        for (Axis axis : {Axis::X, Axis::Y}) {
            const SegmentParams seg(13.0, -41.0, 120.0, beta * 120.0, 1.0, axis);
            const MfiImage img = render(seg, default_frame(seg));
            const ExtremaReport ext = find_extrema(img);
            const double sep = axis == Axis::X ? std::abs(ext.max_pos.y - ext.min_pos.y)
                                               : std::abs(ext.max_pos.x - ext.min_pos.x);
            CAPTURE(beta);
            CHECK(std::abs(sep - pp_distance(seg.length, seg.z0)) <= img.pitch());
        }
    }
}

TEST_CASE("doubling the current doubles every pixel") {
    SegmentParams seg(0.0, 0.0, 80.0, 200.0, 0.7, Axis::Y);
    const MfiImage a = render(seg, default_frame(seg));
    seg.current *= 2.0;
    const MfiImage b = render(seg, a.frame());
    for (std::size_t i = 0; i < a.data().size(); ++i) CHECK(b.data()[i] == 2.0f * a.data()[i]);
}

TEST_CASE("add_noise") {
    const MfiImage zero = constant_image(0.0f, 64);
    SUBCASE("sigma 0 is the identity") { CHECK(add_noise(zero, 0.0, 3) == zero); }
    SUBCASE("deterministic in the seed") {
        CHECK(add_noise(zero, 1e-6, 99) == add_noise(zero, 1e-6, 99));
        CHECK_FALSE(add_noise(zero, 1e-6, 99) == add_noise(zero, 1e-6, 100));
    }
    SUBCASE("sample deviation tracks sigma") {
        const MfiImage noisy = add_noise(zero, 1e-6, 2024);
        double s = 0.0, s2 = 0.0;
        for (float v : noisy.data()) {
            s += v;
            s2 += static_cast<double>(v) * v;
        }
        const double n = static_cast<double>(noisy.data().size());
        const double sd = std::sqrt(s2 / n - (s / n) * (s / n));
        CHECK(sd == doctest::Approx(1e-6).epsilon(0.05));
        CHECK(noisy.noise_sigma() == 1e-6);
        CHECK(noisy.frame().pitch == zero.frame().pitch);
        CHECK(noisy.origin() == zero.origin());
    }
    SUBCASE("negative sigma rejected") { CHECK_THROWS_AS(add_noise(zero, -1.0, 1), InvalidArgument); }
}

TEST_CASE("find_extrema") {
    SUBCASE("constant image ties resolve to the origin") {
        const MfiImage img = constant_image(3.0f);
        const ExtremaReport ext = find_extrema(img);
        CHECK(ext.max_pos == img.origin());
        CHECK(ext.min_pos == img.origin());
        CHECK(ext.max_val == ext.min_val);
    }
    SUBCASE("ties break by lowest row then lowest column") {
        std::vector<float> data(64, 0.0f);
        data[2 * 8 + 5] = 1.0f;
        data[2 * 8 + 3] = 1.0f;
        data[6 * 8 + 1] = 1.0f;
        data[7 * 8 + 7] = -1.0f;
        data[1 * 8 + 6] = -1.0f;
        const MfiImage img(FrameGeometry{8, 1.0, {0.0, 0.0}}, data);
        const ExtremaReport ext = find_extrema(img);
        CHECK(ext.max_pos == FieldPoint{3.0, 2.0});
        CHECK(ext.min_pos == FieldPoint{6.0, 1.0});
    }
    SUBCASE("lobe ordering follows the field sign") {
        const SegmentParams xs(0.0, 0.0, 100.0, 300.0, 1.0, Axis::X);
        const ExtremaReport ex = find_extrema(render(xs, default_frame(xs)));
        CHECK(ex.max_pos.y > ex.min_pos.y);
        const SegmentParams ys(0.0, 0.0, 100.0, 300.0, 1.0, Axis::Y);
        const ExtremaReport ey = find_extrema(render(ys, default_frame(ys)));
        CHECK(ey.max_pos.x < ey.min_pos.x);
    }
}

TEST_CASE("find_lobes centres long-segment lobes on the midpoint") {
    const SegmentParams seg(-1000.0, 50.0, 100.0, 2000.0, 1.0, Axis::X);
    const MfiImage img = add_noise(render(seg, default_frame(seg)), 2e-6, 4);
    const LobeReport lobes = find_lobes(img);
    CHECK(std::abs(lobes.max_centroid.x) < 3.0 * img.pitch());
    CHECK(std::abs(lobes.min_centroid.x) < 3.0 * img.pitch());
    CHECK(lobes.max_centroid.y > 50.0);
    CHECK(lobes.min_centroid.y < 50.0);
    CHECK_THROWS_AS(find_lobes(constant_image(1.0f)), ClassificationFailure);
}

TEST_CASE("snr") {
    std::vector<float> data(64, 0.0f);
    data[10] = 1e-5f;
    data[20] = -1e-5f;
    const MfiImage base(FrameGeometry{8, 1.0, {}}, data, 1e-6);
    CHECK(snr(base) == doctest::Approx(10.0).epsilon(1e-6));
    CHECK(snr(base.with_data(data, 2e-6)) == doctest::Approx(5.0).epsilon(1e-6));
    CHECK_THROWS_AS(snr(base.with_data(data, 0.0)), UndefinedSnr);
}

TEST_CASE("mfi round trip is bitwise") {
    std::mt19937_64 rng(8);
    for (int i = 0; i < 5; ++i) {
        const SegmentParams seg = oracle::random_segment(rng);
        const MfiImage img = add_noise(render(seg, default_frame(seg, 32)), 1e-7 * (i + 1), 77 + i);
        const auto bytes = encode_mfi(img);
        CHECK(bytes.size() == 4 + 4 + 32 + 4 * 32 * 32);
        const MfiImage back = decode_mfi(bytes);
        CHECK(back == img);
        CHECK(std::memcmp(back.data().data(), img.data().data(), 4 * img.data().size()) == 0);
        CHECK(encode_mfi(back) == bytes);
    }
}

TEST_CASE("mfi header layout") {
    const MfiImage img(FrameGeometry{8, 2.5, {-1.0, 3.0}}, std::vector<float>(64, 1.0f), 0.25);
    const auto b = encode_mfi(img);
    CHECK(std::string(b.begin(), b.begin() + 4) == "MFI1");
    CHECK(b[4] == 8);
    CHECK(b[5] == 0);
    double pitch;
    std::memcpy(&pitch, &b[8], 8);
    CHECK(pitch == 2.5);
    float first;
    std::memcpy(&first, &b[40], 4);
    CHECK(first == 1.0f);
}

TEST_CASE("mfi error taxonomy") {
    const MfiImage img(FrameGeometry{8, 1.0, {}}, std::vector<float>(64, 0.5f), 0.0);
    const auto good = encode_mfi(img);

    auto bad_magic = good;
    bad_magic[0] = 'X';
    CHECK(decode_error(bad_magic) == FormatErrorKind::BadMagic);
    CHECK(decode_error({}) == FormatErrorKind::BadMagic);

    auto truncated = good;
    truncated.resize(good.size() - 4);
    CHECK(decode_error(truncated) == FormatErrorKind::Truncated);
    auto header_only = good;
    header_only.resize(20);
    CHECK(decode_error(header_only) == FormatErrorKind::Truncated);

    auto longer = good;
    longer.push_back(0);
    CHECK(decode_error(longer) == FormatErrorKind::SizeMismatch);
    auto tiny = good;
    tiny[4] = 2;
    CHECK(decode_error(tiny) == FormatErrorKind::SizeMismatch);

    auto nan_payload = good;
    const float nan = NAN;
    std::memcpy(&nan_payload[44], &nan, 4);
    CHECK(decode_error(nan_payload) == FormatErrorKind::NonFinite);
}

TEST_CASE("mfi file and stream io") {
    const auto dir = std::filesystem::temp_directory_path() / "wirefit_test_image";
    std::filesystem::create_directories(dir);
    const SegmentParams seg(0.0, 0.0, 60.0, 90.0, 1.0, Axis::Y);
    const MfiImage img = render(seg, default_frame(seg, 24));
    write_mfi(img, dir / "a.mfi");
    CHECK(read_mfi(dir / "a.mfi") == img);
    std::stringstream ss;
    write_mfi(img, ss);
    CHECK(read_mfi(ss) == img);
    CHECK_THROWS_AS(read_mfi(dir / "missing.mfi"), FormatError);
}

TEST_CASE("heatmap export") {
    SUBCASE("constant image maps to 128") {
        const auto pgm = encode_pgm(constant_image(7.0f));
        const std::string header = "P5\n16 16\n255\n";
        CHECK(std::string(pgm.begin(), pgm.begin() + header.size()) == header);
        for (std::size_t i = header.size(); i < pgm.size(); ++i) CHECK(pgm[i] == 128);
    }
    SUBCASE("extremes map to 0 and 255") {
        const SegmentParams seg(0.0, 0.0, 60.0, 90.0, 1.0, Axis::X);
        const MfiImage img = render(seg, default_frame(seg));
        const auto pgm = encode_pgm(img);
        const std::string header = "P5\n64 64\n255\n";
        REQUIRE(pgm.size() == header.size() + 64 * 64);
        CHECK(std::string(pgm.begin(), pgm.begin() + header.size()) == header);
        const auto data = img.data();
        const auto imax = std::max_element(data.begin(), data.end()) - data.begin();
        const auto imin = std::min_element(data.begin(), data.end()) - data.begin();
        CHECK(pgm[header.size() + imax] == 255);
        CHECK(pgm[header.size() + imin] == 0);
    }
}
