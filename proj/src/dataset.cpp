#include "dic/dataset.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "dic/rng.hpp"

namespace dic {

namespace {

constexpr char kMagic[4] = {'D', 'I', 'C', '1'};
constexpr uint64_t kStreamGridFill = 0x404;

// Header after magic+version: 13 u64 fields then 2 f64 fields, little-endian.
constexpr size_t kHeaderU64s = 13;
constexpr size_t kHeaderF64s = 2;
constexpr size_t kHeaderBytes = 4 + 2 + kHeaderU64s * 8 + kHeaderF64s * 8;

struct Crc32Table {
    uint32_t t[256];
    Crc32Table() {
        for (uint32_t i = 0; i < 256; ++i) {
            uint32_t c = i;
            for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xedb88320u ^ (c >> 1) : c >> 1;
            t[i] = c;
        }
    }
};

void put_u64(std::string& buf, uint64_t v) {
    for (int i = 0; i < 8; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::string& buf, double v) {
    uint64_t bits;
    std::memcpy(&bits, &v, 8);
    put_u64(buf, bits);
}

uint64_t get_u64(const uint8_t* p) {
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(p[i]) << (8 * i);
    return v;
}

double get_f64(const uint8_t* p) {
    uint64_t bits = get_u64(p);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

std::string header_bytes(const DatasetManifest& m, uint64_t frames_in_file,
                         uint64_t first_frame_id) {
    std::string buf;
    buf.append(kMagic, 4);
    buf.push_back(static_cast<char>(m.version & 0xff));
    buf.push_back(static_cast<char>((m.version >> 8) & 0xff));
    put_u64(buf, m.total_frames);
    put_u64(buf, m.train_frames);
    put_u64(buf, m.val_frames);
    put_u64(buf, m.test_frames);
    put_u64(buf, static_cast<uint64_t>(m.dims.subframes));
    put_u64(buf, static_cast<uint64_t>(m.dims.ofdm_symbols));
    put_u64(buf, static_cast<uint64_t>(m.dims.subcarriers));
    put_u64(buf, static_cast<uint64_t>(m.qam_order));
    put_u64(buf, static_cast<uint64_t>(m.interference.interferer_order));
    put_u64(buf, static_cast<uint64_t>(m.interference.gain_scope));
    put_u64(buf, m.seed);
    put_u64(buf, frames_in_file);
    put_u64(buf, first_frame_id);
    put_f64(buf, m.interference.sir_db);
    put_f64(buf, m.noise.snr_db);
    return buf;
}

// Serializes one grid as interleaved little-endian f32 I/Q pairs.
void append_grid(std::string& buf, const ResourceGrid& g) {
    for (const auto& v : g.data) {
        float re = static_cast<float>(v.real());
        float im = static_cast<float>(v.imag());
        char tmp[8];
        std::memcpy(tmp, &re, 4);
        std::memcpy(tmp + 4, &im, 4);
        buf.append(tmp, 8);
    }
}

}  // namespace

uint32_t crc32_ieee(const uint8_t* data, size_t len, uint32_t crc) {
    static const Crc32Table table;
    crc = ~crc;
    for (size_t i = 0; i < len; ++i) crc = table.t[(crc ^ data[i]) & 0xff] ^ (crc >> 8);
    return ~crc;
}

std::string to_string(Split s) {
    switch (s) {
        case Split::train: return "train";
        case Split::val: return "val";
        case Split::test: return "test";
    }
    return "?";
}

void DatasetManifest::validate() const {
    if (train_frames + val_frames + test_frames != total_frames) {
        throw std::invalid_argument("manifest: split sizes must sum to total_frames");
    }
    if (total_frames == 0) throw std::invalid_argument("manifest: total_frames must be positive");
    if (!dims.valid()) throw std::invalid_argument("manifest: invalid grid dims");
    QamConstellation::build(qam_order);  // rejects unsupported orders
    if (interference.interferer_order > 0) QamConstellation::build(interference.interferer_order);
    if (version != 1) throw std::invalid_argument("manifest: unsupported format version");
}

uint64_t DatasetManifest::frames_in(Split s) const {
    switch (s) {
        case Split::train: return train_frames;
        case Split::val: return val_frames;
        case Split::test: return test_frames;
    }
    return 0;
}

uint64_t DatasetManifest::first_frame(Split s) const {
    switch (s) {
        case Split::train: return 0;
        case Split::val: return train_frames;
        case Split::test: return train_frames + val_frames;
    }
    return 0;
}

FramePair synthesize_frame(const DatasetManifest& manifest, uint64_t frame_id,
                           const QamConstellation& c) {
    const uint64_t frame_seed = derive_seed(manifest.seed ^ frame_id, kStreamGridFill);
    RandomGrid rg = fill_grid_random(manifest.dims, c, frame_seed);
    InterferenceResult ir = apply_interference(rg.grid, manifest.interference, c, frame_id);
    ResourceGrid corrupted = std::move(ir.corrupted);
    if (manifest.noise.enabled()) {
        corrupted = apply_awgn(corrupted, manifest.noise, manifest.seed ^ frame_id);
    }
    return {std::move(corrupted), std::move(rg.grid)};
}

std::vector<SymbolBlock> blockify(const ResourceGrid& corrupted, const ResourceGrid& clean,
                                  uint64_t frame_id) {
    if (corrupted.data.size() != clean.data.size()) {
        throw std::invalid_argument("blockify: grid size mismatch");
    }
    const int64_t n_blocks = static_cast<int64_t>(corrupted.data.size()) / kBlockLen;
    std::vector<SymbolBlock> out(n_blocks);
    for (int64_t b = 0; b < n_blocks; ++b) {
        SymbolBlock& blk = out[b];
        blk.frame_id = frame_id;
        blk.block_id = static_cast<uint64_t>(b);
        for (int i = 0; i < kBlockLen; ++i) {
            const int64_t j = b * kBlockLen + i;
            blk.corrupted[i] = {static_cast<float>(corrupted.data[j].real()),
                                static_cast<float>(corrupted.data[j].imag())};
            blk.clean[i] = {static_cast<float>(clean.data[j].real()),
                            static_cast<float>(clean.data[j].imag())};
        }
    }
    return out;
}

void generate_dataset(const DatasetManifest& manifest, const std::filesystem::path& out_dir,
                      int threads) {
    manifest.validate();
    std::filesystem::create_directories(out_dir);
    const QamConstellation c = QamConstellation::build(manifest.qam_order);
    if (threads < 1) threads = 1;

    for (Split split : {Split::train, Split::val, Split::test}) {
        const uint64_t n_frames = manifest.frames_in(split);
        const uint64_t first = manifest.first_frame(split);
        const auto path = out_dir / (to_string(split) + ".dic");

        std::ofstream f(path, std::ios::binary | std::ios::trunc);
        if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
        f << header_bytes(manifest, n_frames, first);

        uint32_t crc = 0;
        // Frames serialized in parallel per batch, written strictly in order.
        std::vector<std::string> bufs(threads);
        for (uint64_t base = 0; base < n_frames; base += static_cast<uint64_t>(threads)) {
            const int batch = static_cast<int>(
                std::min<uint64_t>(static_cast<uint64_t>(threads), n_frames - base));
            auto work = [&](int k) {
                FramePair fp = synthesize_frame(manifest, first + base + k, c);
                bufs[k].clear();
                append_grid(bufs[k], fp.corrupted);
                append_grid(bufs[k], fp.clean);
            };
            if (batch == 1) {
                work(0);
            } else {
                std::vector<std::thread> pool;
                for (int k = 0; k < batch; ++k) pool.emplace_back(work, k);
                for (auto& t : pool) t.join();
            }
            for (int k = 0; k < batch; ++k) {
                crc = crc32_ieee(reinterpret_cast<const uint8_t*>(bufs[k].data()), bufs[k].size(),
                                 crc);
                f.write(bufs[k].data(), static_cast<std::streamsize>(bufs[k].size()));
            }
        }
        char footer[4];
        std::memcpy(footer, &crc, 4);
        f.write(footer, 4);
        if (!f) throw std::runtime_error("write failure on " + path.string());
    }
    write_manifest_sidecar(manifest, out_dir / "manifest.txt");
}

DatasetReader::DatasetReader(const std::filesystem::path& dataset_dir, Split split)
    : path_(dataset_dir / (to_string(split) + ".dic")) {
    file_ = std::fopen(path_.string().c_str(), "rb");
    if (!file_) throw std::runtime_error("dataset file missing: " + path_.string());

    uint8_t hdr[kHeaderBytes];
    if (std::fread(hdr, 1, kHeaderBytes, file_) != kHeaderBytes) {
        throw std::runtime_error("dataset file truncated header: " + path_.string());
    }
    if (std::memcmp(hdr, kMagic, 4) != 0) {
        throw std::runtime_error("bad magic in " + path_.string());
    }
    const uint16_t version = static_cast<uint16_t>(hdr[4] | (hdr[5] << 8));
    if (version != 1) {
        throw std::runtime_error("unsupported dataset version " + std::to_string(version) +
                                 " in " + path_.string());
    }
    const uint8_t* p = hdr + 6;
    manifest_.version = version;
    manifest_.total_frames = get_u64(p); p += 8;
    manifest_.train_frames = get_u64(p); p += 8;
    manifest_.val_frames = get_u64(p); p += 8;
    manifest_.test_frames = get_u64(p); p += 8;
    manifest_.dims.subframes = static_cast<int>(get_u64(p)); p += 8;
    manifest_.dims.ofdm_symbols = static_cast<int>(get_u64(p)); p += 8;
    manifest_.dims.subcarriers = static_cast<int>(get_u64(p)); p += 8;
    manifest_.qam_order = static_cast<int>(get_u64(p)); p += 8;
    manifest_.interference.interferer_order = static_cast<int>(get_u64(p)); p += 8;
    manifest_.interference.gain_scope = static_cast<GainScope>(get_u64(p)); p += 8;
    manifest_.seed = get_u64(p); p += 8;
    manifest_.interference.seed = manifest_.seed;
    frames_in_file_ = get_u64(p); p += 8;
    first_frame_id_ = get_u64(p); p += 8;
    manifest_.interference.sir_db = get_f64(p); p += 8;
    manifest_.noise.snr_db = get_f64(p); p += 8;

    const uint64_t frame_bytes = static_cast<uint64_t>(manifest_.dims.symbols_total()) * 2 * 8;
    const uint64_t payload_bytes = frames_in_file_ * frame_bytes;

    // CRC check over the full payload before any frame is served.
    uint32_t crc = 0;
    std::vector<uint8_t> chunk(1 << 20);
    uint64_t remaining = payload_bytes;
    while (remaining > 0) {
        size_t want = static_cast<size_t>(std::min<uint64_t>(remaining, chunk.size()));
        if (std::fread(chunk.data(), 1, want, file_) != want) {
            throw std::runtime_error("dataset payload truncated: " + path_.string());
        }
        crc = crc32_ieee(chunk.data(), want, crc);
        remaining -= want;
    }
    uint8_t footer[4];
    if (std::fread(footer, 1, 4, file_) != 4) {
        throw std::runtime_error("dataset footer missing: " + path_.string());
    }
    uint32_t stored;
    std::memcpy(&stored, footer, 4);
    if (stored != crc) {
        throw std::runtime_error("dataset payload corrupt (CRC mismatch): " + path_.string());
    }
    payload_offset_ = kHeaderBytes;
    std::fseek(file_, static_cast<long>(payload_offset_), SEEK_SET);
}

DatasetReader::~DatasetReader() {
    if (file_) std::fclose(file_);
}

bool DatasetReader::next_frame(ResourceGrid& corrupted, ResourceGrid& clean, uint64_t& frame_id) {
    if (next_index_ >= frames_in_file_) return false;
    corrupted = ResourceGrid(manifest_.dims);
    clean = ResourceGrid(manifest_.dims);
    const int64_t n = manifest_.dims.symbols_total();
    std::vector<float> buf(static_cast<size_t>(n) * 2);
    for (ResourceGrid* g : {&corrupted, &clean}) {
        if (std::fread(buf.data(), 4, buf.size(), file_) != buf.size()) {
            throw std::runtime_error("dataset read failure: " + path_.string());
        }
        for (int64_t i = 0; i < n; ++i) {
            g->data[i] = {static_cast<double>(buf[2 * i]), static_cast<double>(buf[2 * i + 1])};
        }
    }
    frame_id = first_frame_id_ + next_index_;
    ++next_index_;
    return true;
}

std::vector<SymbolBlock> DatasetReader::load_all_blocks() {
    std::vector<SymbolBlock> out;
    out.reserve(frames_in_file_ * static_cast<uint64_t>(manifest_.blocks_per_frame()));
    ResourceGrid corrupted, clean;
    uint64_t fid;
    while (next_frame(corrupted, clean, fid)) {
        auto blocks = blockify(corrupted, clean, fid);
        out.insert(out.end(), blocks.begin(), blocks.end());
    }
    return out;
}

void DatasetReader::for_each_frame(
    const std::function<void(const ResourceGrid&, const ResourceGrid&, uint64_t)>& fn) {
    ResourceGrid corrupted, clean;
    uint64_t fid;
    while (next_frame(corrupted, clean, fid)) fn(corrupted, clean, fid);
}

void write_manifest_sidecar(const DatasetManifest& m, const std::filesystem::path& path) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    f << "format_version=" << m.version << "\n"
      << "total_frames=" << m.total_frames << "\n"
      << "train_frames=" << m.train_frames << "\n"
      << "val_frames=" << m.val_frames << "\n"
      << "test_frames=" << m.test_frames << "\n"
      << "subframes=" << m.dims.subframes << "\n"
      << "ofdm_symbols=" << m.dims.ofdm_symbols << "\n"
      << "subcarriers=" << m.dims.subcarriers << "\n"
      << "qam_order=" << m.qam_order << "\n"
      << "interferer_order=" << m.interference.interferer_order << "\n"
      << "gain_scope=" << to_string(m.interference.gain_scope) << "\n"
      << "sir_db=" << std::hexfloat << m.interference.sir_db << std::defaultfloat << "\n"
      << "snr_db=" << std::hexfloat << m.noise.snr_db << std::defaultfloat << "\n"
      << "seed=" << m.seed << "\n";
}

DatasetManifest read_manifest_sidecar(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot read " + path.string());
    DatasetManifest m;
    std::string line;
    while (std::getline(f, line)) {
        auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        std::string key = line.substr(0, eq);
        std::string val = line.substr(eq + 1);
        if (key == "format_version") m.version = static_cast<uint16_t>(std::stoul(val));
        else if (key == "total_frames") m.total_frames = std::stoull(val);
        else if (key == "train_frames") m.train_frames = std::stoull(val);
        else if (key == "val_frames") m.val_frames = std::stoull(val);
        else if (key == "test_frames") m.test_frames = std::stoull(val);
        else if (key == "subframes") m.dims.subframes = std::stoi(val);
        else if (key == "ofdm_symbols") m.dims.ofdm_symbols = std::stoi(val);
        else if (key == "subcarriers") m.dims.subcarriers = std::stoi(val);
        else if (key == "qam_order") m.qam_order = std::stoi(val);
        else if (key == "interferer_order") m.interference.interferer_order = std::stoi(val);
        else if (key == "gain_scope") m.interference.gain_scope = gain_scope_from_string(val);
        else if (key == "sir_db") m.interference.sir_db = std::strtod(val.c_str(), nullptr);
        else if (key == "snr_db") m.noise.snr_db = std::strtod(val.c_str(), nullptr);
        else if (key == "seed") m.seed = std::stoull(val);
    }
    m.interference.seed = m.seed;
    return m;
}

}  // namespace dic
