#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "dic/dataset.hpp"

using namespace dic;
namespace fs = std::filesystem;

namespace {

DatasetManifest small_manifest() {
    DatasetManifest m;
    m.total_frames = 6;
    m.train_frames = 3;
    m.val_frames = 1;
    m.test_frames = 2;
    m.dims = {1, 4, 64};
    m.qam_order = 16;
    m.interference.sir_db = 3.0;
    m.seed = 42;
    m.interference.seed = 42;
    return m;
}

fs::path temp_dir(const std::string& tag) {
    auto p = fs::temp_directory_path() / ("dic_test_" + tag);
    fs::remove_all(p);
    return p;
}

std::vector<char> slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("manifest validation") {
    auto m = small_manifest();
    CHECK_NOTHROW(m.validate());
    m.train_frames = 4;  // splits no longer sum
    CHECK_THROWS(m.validate());
    m = small_manifest();
    m.qam_order = 8;
    CHECK_THROWS(m.validate());
}

TEST_CASE("blockify counts and remainder drop") {
    GridDims dims{11, 140, 180};
    const auto c = QamConstellation::build(4);
    auto rg = fill_grid_random(dims, c, 1);
    auto blocks = blockify(rg.grid, rg.grid, 7);
    CHECK(blocks.size() == 4331);  // floor(277200/64), 16 symbols dropped
    CHECK(blocks.front().frame_id == 7);
    CHECK(blocks.back().block_id == 4330);

    GridDims two{1, 2, 64};
    auto rg2 = fill_grid_random(two, c, 1);
    CHECK(blockify(rg2.grid, rg2.grid, 0).size() == 2);

    // concatenation of blocks equals the row-major prefix
    auto blocks2 = blockify(rg2.grid, rg2.grid, 0);
    for (size_t b = 0; b < blocks2.size(); ++b) {
        for (int i = 0; i < kBlockLen; ++i) {
            const auto& re = rg2.grid.data[b * kBlockLen + i];
            CHECK(blocks2[b].clean[i] == std::complex<float>(static_cast<float>(re.real()),
                                                             static_cast<float>(re.imag())));
        }
    }
}

TEST_CASE("generate -> load round trip and split accounting") {
    const auto m = small_manifest();
    const auto dir = temp_dir("roundtrip");
    generate_dataset(m, dir);
    CHECK(fs::exists(dir / "train.dic"));
    CHECK(fs::exists(dir / "val.dic"));
    CHECK(fs::exists(dir / "test.dic"));
    CHECK(fs::exists(dir / "manifest.txt"));

    DatasetReader train(dir, Split::train);
    CHECK(train.frame_count() == 3);
    CHECK(train.first_frame_id() == 0);
    CHECK(train.manifest().qam_order == 16);
    auto blocks = train.load_all_blocks();
    CHECK(blocks.size() == 3u * 4u);  // (1*4*64)/64 = 4 blocks per frame

    DatasetReader test(dir, Split::test);
    CHECK(test.first_frame_id() == 4);
    CHECK(test.frame_count() == 2);

    // loaded frames match in-memory synthesis bit-exactly at f32 precision
    const auto c = QamConstellation::build(m.qam_order);
    DatasetReader again(dir, Split::val);
    ResourceGrid corrupted, clean;
    uint64_t fid;
    REQUIRE(again.next_frame(corrupted, clean, fid));
    CHECK(fid == 3);
    FramePair fp = synthesize_frame(m, 3, c);
    for (size_t i = 0; i < clean.data.size(); ++i) {
        CHECK(static_cast<float>(fp.clean.data[i].real()) ==
              static_cast<float>(clean.data[i].real()));
        CHECK(static_cast<float>(fp.corrupted.data[i].imag()) ==
              static_cast<float>(corrupted.data[i].imag()));
    }
}

TEST_CASE("regeneration is byte-identical") {
    const auto m = small_manifest();
    const auto d1 = temp_dir("regen1");
    const auto d2 = temp_dir("regen2");
    generate_dataset(m, d1, /*threads=*/1);
    generate_dataset(m, d2, /*threads=*/4);
    for (const char* f : {"train.dic", "val.dic", "test.dic", "manifest.txt"}) {
        CHECK(slurp(d1 / f) == slurp(d2 / f));
    }
}

TEST_CASE("corrupt and truncated files are rejected") {
    const auto m = small_manifest();
    const auto dir = temp_dir("corrupt");
    generate_dataset(m, dir);

    SUBCASE("bad magic") {
        auto bytes = slurp(dir / "val.dic");
        bytes[0] = 'X';
        std::ofstream(dir / "val.dic", std::ios::binary | std::ios::trunc)
            .write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        CHECK_THROWS_WITH_AS(DatasetReader(dir, Split::val),
                             doctest::Contains("bad magic"), std::runtime_error);
    }
    SUBCASE("unknown version") {
        auto bytes = slurp(dir / "val.dic");
        bytes[4] = 9;
        std::ofstream(dir / "val.dic", std::ios::binary | std::ios::trunc)
            .write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        CHECK_THROWS_WITH_AS(DatasetReader(dir, Split::val),
                             doctest::Contains("version"), std::runtime_error);
    }
    SUBCASE("payload bit flip") {
        auto bytes = slurp(dir / "val.dic");
        bytes[bytes.size() / 2] ^= 0x10;
        std::ofstream(dir / "val.dic", std::ios::binary | std::ios::trunc)
            .write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        CHECK_THROWS_WITH_AS(DatasetReader(dir, Split::val),
                             doctest::Contains("corrupt"), std::runtime_error);
    }
    SUBCASE("truncation") {
        auto bytes = slurp(dir / "val.dic");
        bytes.resize(bytes.size() / 2);
        std::ofstream(dir / "val.dic", std::ios::binary | std::ios::trunc)
            .write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        CHECK_THROWS_WITH_AS(DatasetReader(dir, Split::val),
                             doctest::Contains("truncated"), std::runtime_error);
    }
    SUBCASE("missing file") {
        fs::remove(dir / "val.dic");
        CHECK_THROWS_WITH_AS(DatasetReader(dir, Split::val),
                             doctest::Contains("missing"), std::runtime_error);
    }
}

TEST_CASE("block alignment: corrupted - clean matches interferer statistics") {
    auto m = small_manifest();
    m.dims = {1, 20, 64};
    const auto dir = temp_dir("align");
    generate_dataset(m, dir);
    DatasetReader r(dir, Split::train);
    auto blocks = r.load_all_blocks();
    double e = 0.0;
    int64_t n = 0;
    for (const auto& b : blocks) {
        for (int i = 0; i < kBlockLen; ++i) {
            const auto d = b.corrupted[i] - b.clean[i];
            e += std::norm(std::complex<double>(d.real(), d.imag()));
            ++n;
        }
    }
    e /= static_cast<double>(n);
    const double expected = std::pow(10.0, -m.interference.sir_db / 10.0);
    CHECK(e / expected > 0.9);
    CHECK(e / expected < 1.1);
}

TEST_CASE("manifest sidecar round trips") {
    const auto m = small_manifest();
    const auto dir = temp_dir("sidecar");
    generate_dataset(m, dir);
    auto loaded = read_manifest_sidecar(dir / "manifest.txt");
    CHECK(loaded.total_frames == m.total_frames);
    CHECK(loaded.train_frames == m.train_frames);
    CHECK(loaded.dims.subcarriers == m.dims.subcarriers);
    CHECK(loaded.qam_order == m.qam_order);
    CHECK(loaded.interference.sir_db == m.interference.sir_db);
    CHECK(loaded.seed == m.seed);
}
