#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "dic/channel.hpp"
#include "dic/phy.hpp"

namespace dic {

inline constexpr int kBlockLen = 64;

struct SymbolBlock {
    std::array<std::complex<float>, kBlockLen> corrupted;
    std::array<std::complex<float>, kBlockLen> clean;
    uint64_t frame_id = 0;
    uint64_t block_id = 0;
};

enum class Split : uint8_t { train = 0, val = 1, test = 2 };

std::string to_string(Split s);

struct DatasetManifest {
    uint64_t total_frames = 1000;
    uint64_t train_frames = 500;
    uint64_t val_frames = 100;
    uint64_t test_frames = 400;
    GridDims dims;
    int qam_order = 256;
    InterferenceConfig interference;
    NoiseConfig noise;
    uint64_t seed = 0;
    uint16_t version = 1;

    void validate() const;
    uint64_t frames_in(Split s) const;
    uint64_t first_frame(Split s) const;
    int64_t blocks_per_frame() const { return dims.symbols_total() / kBlockLen; }
};

// Cuts paired grids into consecutive non-overlapping length-64 blocks in
// row-major RE order; a trailing remainder shorter than 64 is dropped.
std::vector<SymbolBlock> blockify(const ResourceGrid& corrupted, const ResourceGrid& clean,
                                  uint64_t frame_id);

// Generates all frames and writes train.dic / val.dic / test.dic plus a
// manifest.txt sidecar under out_dir. Fully deterministic given the manifest.
void generate_dataset(const DatasetManifest& manifest, const std::filesystem::path& out_dir,
                      int threads = 1);

// Streaming reader over one split file. Validates magic, version and the
// payload CRC (checked up-front, so construction touches the whole file).
class DatasetReader {
public:
    DatasetReader(const std::filesystem::path& dataset_dir, Split split);

    const DatasetManifest& manifest() const { return manifest_; }
    uint64_t frame_count() const { return frames_in_file_; }
    uint64_t first_frame_id() const { return first_frame_id_; }

    // Reads the next frame's grids; returns false at end of file.
    bool next_frame(ResourceGrid& corrupted, ResourceGrid& clean, uint64_t& frame_id);

    // Convenience: all blocks of the split.
    std::vector<SymbolBlock> load_all_blocks();

    void for_each_frame(const std::function<void(const ResourceGrid& corrupted,
                                                 const ResourceGrid& clean, uint64_t frame_id)>& fn);

private:
    std::filesystem::path path_;
    DatasetManifest manifest_;
    uint64_t frames_in_file_ = 0;
    uint64_t first_frame_id_ = 0;
    uint64_t next_index_ = 0;
    uint64_t payload_offset_ = 0;
    FILE* file_ = nullptr;

public:
    ~DatasetReader();
    DatasetReader(const DatasetReader&) = delete;
    DatasetReader& operator=(const DatasetReader&) = delete;
};

// Produces the corrupted/clean grid pair of one frame (shared by the
// generator and by in-memory pipelines).
struct FramePair {
    ResourceGrid corrupted;
    ResourceGrid clean;
};
FramePair synthesize_frame(const DatasetManifest& manifest, uint64_t frame_id,
                           const QamConstellation& c);

uint32_t crc32_ieee(const uint8_t* data, size_t len, uint32_t crc = 0);

void write_manifest_sidecar(const DatasetManifest& m, const std::filesystem::path& path);
DatasetManifest read_manifest_sidecar(const std::filesystem::path& path);

}  // namespace dic
