#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include "temp_dir.hpp"
#include "wirefit/dataset.hpp"
#include "wirefit/errors.hpp"

using namespace wirefit;

namespace {

DatasetSpec small_spec(std::uint64_t seed = 3) {
    DatasetSpec s;
    s.train = 12;
    s.val = 5;
    s.test = 7;
    s.seed = seed;
    return s;
}

std::size_t count_mfi(const std::filesystem::path& dir) {
    std::size_t n = 0;
    for (const auto& e : std::filesystem::directory_iterator(dir)) n += e.path().extension() == ".mfi";
    return n;
}

}  // namespace

TEST_CASE("standard split counts") {
    TempDir dir("std");
    const auto records = generate_dataset(DatasetSpec{}, dir.path());
    CHECK(records.size() == 6100);
    CHECK(count_mfi(dir.path()) == 6100);
    const auto back = read_manifest(dir / kManifestName);
    CHECK(back.size() == 6100);
    std::map<Split, std::size_t> per_split;
    for (const auto& r : back) ++per_split[r.split];
    CHECK(per_split[Split::Train] == 5000);
    CHECK(per_split[Split::Val] == 600);
    CHECK(per_split[Split::Test] == 500);
}

TEST_CASE("same seed gives a byte-identical dataset") {
    TempDir a("seed_a");
    TempDir b("seed_b");
    const auto ra = generate_dataset(small_spec(), a.path());
    generate_dataset(small_spec(), b.path());
    CHECK(file_bytes(a / kManifestName) == file_bytes(b / kManifestName));
    for (const auto& r : ra) CHECK(file_bytes(a / r.file) == file_bytes(b / r.file));

    TempDir c("seed_c");
    generate_dataset(small_spec(4), c.path());
    CHECK(file_bytes(a / kManifestName) != file_bytes(c / kManifestName));
}

TEST_CASE("axis and sign are balanced within each split") {
    DatasetSpec s = small_spec();
    s.train = 101;
    s.val = 10;
    s.test = 33;
    for (Split split : {Split::Train, Split::Val, Split::Test}) {
        const std::size_t n = split == Split::Train ? s.train : split == Split::Val ? s.val : s.test;
        long x = 0, y = 0, pos = 0, neg = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const ManifestRecord r = generate_one(s, split, i).record;
            (r.truth.axis == Axis::X ? x : y) += 1;
            (r.truth.current > 0.0 ? pos : neg) += 1;
        }
        CHECK(std::abs(x - y) <= 1);
        CHECK(std::abs(pos - neg) <= 2);
    }
}

TEST_CASE("draws respect the configured ranges") {
    const DatasetSpec s = small_spec();
    for (std::size_t i = 0; i < 200; ++i) {
        const GeneratedImage g = generate_one(s, Split::Train, i);
        const SegmentParams& t = g.record.truth;
        CHECK(t.z0 >= s.z0.lo);
        CHECK(t.z0 <= s.z0.hi);
        CHECK(t.beta() >= s.beta.lo * (1 - 1e-12));
        CHECK(t.beta() <= s.beta.hi * (1 + 1e-12));
        CHECK(std::abs(t.current) >= s.current.lo);
        CHECK(std::abs(t.current) <= s.current.hi);
        CHECK(g.record.target_snr >= s.snr.lo);
        CHECK(g.record.target_snr <= s.snr.hi);
        CHECK(g.image.size() == s.image_size);
        CHECK(g.image.noise_sigma() == g.record.sigma);

        // Noise level follows the target S/N of the clean render.
        const ExtremaReport clean = find_extrema(render(t, g.image.frame()));
        CHECK(g.record.sigma == doctest::Approx((clean.max_val - clean.min_val) / (2.0 * g.record.target_snr)));
    }
}

TEST_CASE("noiseless generation is the plain render") {
    DatasetSpec s = small_spec();
    s.noiseless = true;
    for (std::size_t i = 0; i < 8; ++i) {
        const GeneratedImage g = generate_one(s, Split::Test, i);
        CHECK(g.record.sigma == 0.0);
        CHECK(g.record.target_snr == 0.0);
        CHECK(g.image == render(g.record.truth, g.image.frame()));
        // The segment stays inside the jittered frame.
        const double span = g.image.pitch() * static_cast<double>(g.image.size());
        const FieldPoint o = g.image.origin();
        const SegmentParams& t = g.record.truth;
        const double mx = t.x0 + (t.axis == Axis::X ? 0.5 * t.length : 0.0);
        const double my = t.y0 + (t.axis == Axis::Y ? 0.5 * t.length : 0.0);
        CHECK(mx > o.x);
        CHECK(mx < o.x + span);
        CHECK(my > o.y);
        CHECK(my < o.y + span);
    }
}

TEST_CASE("file names and the per-index stream") {
    const DatasetSpec s = small_spec();
    CHECK(generate_one(s, Split::Test, 3).record.file == "test_00003.mfi");
    CHECK(generate_one(s, Split::Train, 12345).record.file == "train_12345.mfi");
    // Entries do not depend on how many came before them.
    DatasetSpec bigger = s;
    bigger.train = 1000;
    CHECK(generate_one(bigger, Split::Val, 2).image == generate_one(s, Split::Val, 2).image);
    CHECK(generate_one(s, Split::Val, 2).image != generate_one(s, Split::Test, 2).image);
}

TEST_CASE("manifest round-trips exactly") {
    TempDir dir("manifest");
    const auto records = generate_dataset(small_spec(), dir.path());
    const auto back = read_manifest(dir / kManifestName);
    REQUIRE(back.size() == records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        CHECK(back[i].file == records[i].file);
        CHECK(back[i].split == records[i].split);
        CHECK(back[i].truth.x0 == records[i].truth.x0);
        CHECK(back[i].truth.y0 == records[i].truth.y0);
        CHECK(back[i].truth.z0 == records[i].truth.z0);
        CHECK(back[i].truth.length == records[i].truth.length);
        CHECK(back[i].truth.current == records[i].truth.current);
        CHECK(back[i].truth.axis == records[i].truth.axis);
        CHECK(back[i].sigma == records[i].sigma);
        CHECK(back[i].target_snr == records[i].target_snr);
        CHECK(read_mfi(dir / back[i].file) == generate_one(small_spec(), back[i].split,
                                                             std::stoul(back[i].file.substr(back[i].file.size() - 9, 5))).image);
    }
    std::ifstream in(dir / kManifestName);
    std::string header;
    std::getline(in, header);
    CHECK(header == "file\tsplit\taxis\tx0_um\ty0_um\tz0_um\tlength_um\tcurrent_a\tsigma_t\ttarget_snr");
}

TEST_CASE("malformed manifests are rejected") {
    TempDir dir("bad_manifest");
    auto write = [&](const std::string& text) {
        std::ofstream(dir / "m.tsv") << text;
        return dir / "m.tsv";
    };
    const std::string header = "file\tsplit\taxis\tx0_um\ty0_um\tz0_um\tlength_um\tcurrent_a\tsigma_t\ttarget_snr\n";
    CHECK_THROWS_AS(read_manifest(write("nonsense\n")), InvalidArgument);
    CHECK_THROWS_AS(read_manifest(write(header + "a.mfi\ttest\tx\t0\t0\t100\t200\t1\t0\n")), InvalidArgument);
    CHECK_THROWS_AS(read_manifest(write(header + "a.mfi\ttest\tx\t0\t0\t1e2x\t200\t1\t0\t0\n")), InvalidArgument);
    CHECK_THROWS_AS(read_manifest(write(header + "a.mfi\tdev\tx\t0\t0\t100\t200\t1\t0\t0\n")), InvalidArgument);
    CHECK_THROWS_AS(read_manifest(write(header + "a.mfi\ttest\tz\t0\t0\t100\t200\t1\t0\t0\n")), InvalidArgument);
    CHECK_THROWS_AS(read_manifest(write(header + "a.mfi\ttest\tx\t0\t0\t-100\t200\t1\t0\t0\n")), InvalidArgument);
    CHECK(read_manifest(write(header + "a.mfi\ttest\tx\t0\t0\t100\t200\t1\t0\t0\n")).size() == 1);
    CHECK_THROWS_AS(read_manifest(dir / "missing.tsv"), Error);
}

TEST_CASE("spec validation") {
    DatasetSpec s;
    CHECK_NOTHROW(s.validate());
    s.train = s.val = s.test = 0;
    CHECK_THROWS_AS(s.validate(), InvalidArgument);
    s = DatasetSpec{};
    s.train = s.val = 0;
    CHECK_NOTHROW(s.validate());
    s = DatasetSpec{};
    s.z0 = {500.0, 50.0};
    CHECK_THROWS_AS(s.validate(), InvalidArgument);
    s = DatasetSpec{};
    s.snr = {0.0, 10.0};
    CHECK_THROWS_AS(s.validate(), InvalidArgument);
    s = DatasetSpec{};
    s.image_size = 4;
    CHECK_THROWS_AS(s.validate(), InvalidArgument);
    s = DatasetSpec{};
    s.beta = {NAN, 2.0};
    CHECK_THROWS_AS(s.validate(), InvalidArgument);
}
