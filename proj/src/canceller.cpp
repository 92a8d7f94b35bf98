#include "dic/canceller.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "dic/quant.hpp"

namespace dic {

IqMode iq_mode_from_string(const std::string& s) {
    if (s == "split_iq") return IqMode::split_iq;
    if (s == "stacked_iq") return IqMode::stacked_iq;
    throw std::invalid_argument("unknown iq mode: " + s);
}

std::string to_string(IqMode m) {
    return m == IqMode::split_iq ? "split_iq" : "stacked_iq";
}

CancellerModel::CancellerModel(IqMode mode, uint64_t init_seed)
    : conv1a(mode == IqMode::split_iq ? 1 : 2, 32, 3), conv1b(32, 32, 3),
      conv2a(32, 64, 3), conv2b(64, 64, 3),
      bn1a(32), bn1b(32), bn2a(64), bn2b(64),
      lstm1(64, 32), lstm2(32, 16), lstm3(16, 32), lstm4(32, 64),
      conv3a(64, 32, 3), conv3b(32, 32, 3),
      conv4(32, mode == IqMode::split_iq ? 1 : 2, 1),
      bn3a(32), bn3b(32),
      mode_(mode), relus_(6) {
    SplitMix64 rng(derive_seed(init_seed, 0x515));
    conv1a.init(rng); conv1b.init(rng); conv2a.init(rng); conv2b.init(rng);
    lstm1.init(rng); lstm2.init(rng); lstm3.init(rng); lstm4.init(rng);
    conv3a.init(rng); conv3b.init(rng); conv4.init(rng);
    for (BatchNorm1d* bn : {&bn1a, &bn1b, &bn2a, &bn2b, &bn3a, &bn3b}) {
        bn->allow_default_stats = true;
    }
}

Tensor CancellerModel::forward_batch(const Tensor& x, bool train, const ActivationQuantizer* aq) {
    if (x.shape.size() != 3 || x.shape[1] != io_channels() || x.shape[2] != kBlockLen) {
        throw std::invalid_argument("CancellerModel: expected [B," +
                                    std::to_string(io_channels()) + ",64], got " + x.shape_str());
    }
    auto q = [&](int site, Tensor t) {
        if (aq) aq->apply(site, t);
        return t;
    };
    Tensor h = q(0, x);
    h = q(1, relus_[0].forward(bn1a.forward(conv1a.forward(h), train)));
    h = q(2, relus_[1].forward(bn1b.forward(conv1b.forward(h), train)));
    h = q(3, relus_[2].forward(bn2a.forward(conv2a.forward(h), train)));
    h = q(4, relus_[3].forward(bn2b.forward(conv2b.forward(h), train)));
    h = transpose_cl(h);  // [B, 64 pos, 64 feat]
    h = q(5, lstm1.forward(h));
    h = q(6, lstm2.forward(h));
    h = q(7, lstm3.forward(h));
    h = q(8, lstm4.forward(h));
    h = transpose_cl(h);  // back to [B, 64 ch, 64 pos]
    h = q(9, relus_[4].forward(bn3a.forward(conv3a.forward(h), train)));
    h = q(10, relus_[5].forward(bn3b.forward(conv3b.forward(h), train)));
    h = q(11, conv4.forward(h));
    return h;
}

Tensor CancellerModel::backward_batch(const Tensor& gy) {
    Tensor g = conv4.backward(gy);
    g = conv3b.backward(bn3b.backward(relus_[5].backward(g)));
    g = conv3a.backward(bn3a.backward(relus_[4].backward(g)));
    g = transpose_cl(g);
    g = lstm4.backward(g);
    g = lstm3.backward(g);
    g = lstm2.backward(g);
    g = lstm1.backward(g);
    g = transpose_cl(g);
    g = conv2b.backward(bn2b.backward(relus_[3].backward(g)));
    g = conv2a.backward(bn2a.backward(relus_[2].backward(g)));
    g = conv1b.backward(bn1b.backward(relus_[1].backward(g)));
    g = conv1a.backward(bn1a.backward(relus_[0].backward(g)));
    return g;
}

std::vector<Tensor*> CancellerModel::parameters() {
    std::vector<Tensor*> out;
    for (Conv1d* c : {&conv1a, &conv1b, &conv2a, &conv2b, &conv3a, &conv3b, &conv4}) {
        out.push_back(&c->weight);
        out.push_back(&c->bias);
    }
    for (BatchNorm1d* bn : {&bn1a, &bn1b, &bn2a, &bn2b, &bn3a, &bn3b}) {
        out.push_back(&bn->gamma);
        out.push_back(&bn->beta);
    }
    for (Lstm* l : {&lstm1, &lstm2, &lstm3, &lstm4}) {
        out.push_back(&l->w_input);
        out.push_back(&l->w_hidden);
        out.push_back(&l->bias);
    }
    return out;
}

std::vector<std::pair<std::string, Tensor*>> CancellerModel::named_tensors() {
    std::vector<std::pair<std::string, Tensor*>> out;
    auto conv = [&](const std::string& n, Conv1d& c) {
        out.emplace_back(n + ".weight", &c.weight);
        out.emplace_back(n + ".bias", &c.bias);
    };
    auto bn = [&](const std::string& n, BatchNorm1d& b) {
        out.emplace_back(n + ".gamma", &b.gamma);
        out.emplace_back(n + ".beta", &b.beta);
        out.emplace_back(n + ".running_mean", &b.running_mean);
        out.emplace_back(n + ".running_var", &b.running_var);
    };
    auto lstm = [&](const std::string& n, Lstm& l) {
        out.emplace_back(n + ".w_input", &l.w_input);
        out.emplace_back(n + ".w_hidden", &l.w_hidden);
        out.emplace_back(n + ".bias", &l.bias);
    };
    conv("conv1a", conv1a); bn("bn1a", bn1a);
    conv("conv1b", conv1b); bn("bn1b", bn1b);
    conv("conv2a", conv2a); bn("bn2a", bn2a);
    conv("conv2b", conv2b); bn("bn2b", bn2b);
    lstm("lstm1", lstm1); lstm("lstm2", lstm2); lstm("lstm3", lstm3); lstm("lstm4", lstm4);
    conv("conv3a", conv3a); bn("bn3a", bn3a);
    conv("conv3b", conv3b); bn("bn3b", bn3b);
    conv("conv4", conv4);
    return out;
}

int64_t CancellerModel::parameter_count() {
    int64_t n = 0;
    for (auto& [name, t] : named_tensors()) n += t->numel();
    return n;
}

Tensor pack_blocks(std::span<const SymbolBlock> blocks, IqMode mode, bool corrupted_side) {
    const int64_t n = static_cast<int64_t>(blocks.size());
    if (n == 0) throw std::invalid_argument("pack_blocks: empty batch");
    if (mode == IqMode::split_iq) {
        Tensor x({2 * n, 1, kBlockLen});
        for (int64_t b = 0; b < n; ++b) {
            const auto& src = corrupted_side ? blocks[b].corrupted : blocks[b].clean;
            float* re = x.data.data() + (2 * b) * kBlockLen;
            float* im = x.data.data() + (2 * b + 1) * kBlockLen;
            for (int i = 0; i < kBlockLen; ++i) {
                re[i] = src[i].real();
                im[i] = src[i].imag();
            }
        }
        return x;
    }
    Tensor x({n, 2, kBlockLen});
    for (int64_t b = 0; b < n; ++b) {
        const auto& src = corrupted_side ? blocks[b].corrupted : blocks[b].clean;
        float* re = x.data.data() + b * 2 * kBlockLen;
        float* im = re + kBlockLen;
        for (int i = 0; i < kBlockLen; ++i) {
            re[i] = src[i].real();
            im[i] = src[i].imag();
        }
    }
    return x;
}

void unpack_output(const Tensor& y, IqMode mode,
                   std::vector<std::array<std::complex<float>, kBlockLen>>& out) {
    if (mode == IqMode::split_iq) {
        const int64_t n = y.shape[0] / 2;
        for (int64_t b = 0; b < n; ++b) {
            const float* re = y.data.data() + (2 * b) * kBlockLen;
            const float* im = y.data.data() + (2 * b + 1) * kBlockLen;
            auto& blk = out.emplace_back();
            for (int i = 0; i < kBlockLen; ++i) blk[i] = {re[i], im[i]};
        }
        return;
    }
    const int64_t n = y.shape[0];
    for (int64_t b = 0; b < n; ++b) {
        const float* re = y.data.data() + b * 2 * kBlockLen;
        const float* im = re + kBlockLen;
        auto& blk = out.emplace_back();
        for (int i = 0; i < kBlockLen; ++i) blk[i] = {re[i], im[i]};
    }
}

std::vector<std::array<std::complex<float>, kBlockLen>> CancellerModel::forward_blocks(
    std::span<const SymbolBlock> blocks, const ActivationQuantizer* aq) {
    std::vector<std::array<std::complex<float>, kBlockLen>> out;
    out.reserve(blocks.size());
    constexpr size_t kChunk = 512;
    for (size_t base = 0; base < blocks.size(); base += kChunk) {
        const size_t n = std::min(kChunk, blocks.size() - base);
        Tensor x = pack_blocks(blocks.subspan(base, n), mode_, /*corrupted_side=*/true);
        Tensor y = forward_batch(x, /*train=*/false, aq);
        unpack_output(y, mode_, out);
    }
    return out;
}

void TrainConfig::validate() const {
    if (epochs < 0) throw std::invalid_argument("train: epochs must be >= 0");
    if (batch_size <= 0) throw std::invalid_argument("train: batch_size must be positive");
    if (!(lr > 0.0)) throw std::invalid_argument("train: learning rate must be positive");
    if (weight_decay < 0.0) throw std::invalid_argument("train: weight_decay must be >= 0");
    if (aug_noise < 0.0) throw std::invalid_argument("train: aug_noise must be >= 0");
}

namespace {

double dataset_loss(CancellerModel& model, const std::vector<SymbolBlock>& blocks,
                    int batch_size) {
    double acc = 0.0;
    int64_t count = 0;
    for (size_t base = 0; base < blocks.size(); base += static_cast<size_t>(batch_size)) {
        const size_t n = std::min(static_cast<size_t>(batch_size), blocks.size() - base);
        std::span<const SymbolBlock> chunk(blocks.data() + base, n);
        Tensor x = pack_blocks(chunk, model.iq_mode(), true);
        Tensor t = pack_blocks(chunk, model.iq_mode(), false);
        Tensor y = model.forward_batch(x, /*train=*/false);
        acc += mse_loss(y, t) * static_cast<double>(y.numel());
        count += y.numel();
    }
    return acc / static_cast<double>(count);
}

struct Snapshot {
    std::vector<std::vector<float>> values;
    bool stats_init = false;

    static Snapshot take(CancellerModel& m) {
        Snapshot s;
        for (auto& [name, t] : m.named_tensors()) s.values.push_back(t->data);
        s.stats_init = m.bn1a.stats_initialized;
        return s;
    }
    void restore(CancellerModel& m) const {
        size_t i = 0;
        for (auto& [name, t] : m.named_tensors()) t->data = values[i++];
        for (BatchNorm1d* bn : {&m.bn1a, &m.bn1b, &m.bn2a, &m.bn2b, &m.bn3a, &m.bn3b}) {
            bn->stats_initialized = stats_init;
        }
    }
};

}  // namespace

double validation_loss(CancellerModel& model, const std::vector<SymbolBlock>& blocks,
                       int batch_size) {
    if (blocks.empty()) throw std::invalid_argument("validation_loss: empty split");
    return dataset_loss(model, blocks, batch_size);
}

TrainResult train_canceller(const std::vector<SymbolBlock>& train_blocks,
                            const std::vector<SymbolBlock>& val_blocks, const TrainConfig& cfg) {
    cfg.validate();
    if (train_blocks.empty() || val_blocks.empty()) {
        throw std::invalid_argument("train: empty train or validation split");
    }

    TrainResult res;
    res.model = std::make_unique<CancellerModel>(cfg.iq_mode, cfg.seed);
    CancellerModel& model = *res.model;
    Adam opt(model.parameters(), cfg.lr, 0.9, 0.999, 1e-8, cfg.weight_decay);

    double init_train = dataset_loss(model, train_blocks, 256);
    double init_val = dataset_loss(model, val_blocks, 256);
    res.curve.push_back({0, init_train, init_val});

    Snapshot best = Snapshot::take(model);
    double best_val = init_val;
    int best_epoch = 0;
    uint64_t epochs_done = 0;

    std::vector<size_t> order(train_blocks.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::vector<SymbolBlock> batch;
    std::vector<uint32_t> perm;
    std::vector<SymbolBlock> resampled;

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        SplitMix64 shuffle_rng(derive_seed(cfg.seed, 0x600 + static_cast<uint64_t>(epoch)));
        if (cfg.resample_blocks) {
            const size_t total = train_blocks.size() * kBlockLen;
            perm.resize(total);
            for (size_t i = 0; i < total; ++i) perm[i] = static_cast<uint32_t>(i);
            for (size_t i = total; i > 1; --i) {
                size_t j = static_cast<size_t>(shuffle_rng.next() % i);
                std::swap(perm[i - 1], perm[j]);
            }
            resampled.resize(train_blocks.size());
            for (size_t b = 0; b < resampled.size(); ++b) {
                for (size_t k = 0; k < kBlockLen; ++k) {
                    const uint32_t src = perm[b * kBlockLen + k];
                    const SymbolBlock& sb = train_blocks[src / kBlockLen];
                    resampled[b].corrupted[k] = sb.corrupted[src % kBlockLen];
                    resampled[b].clean[k] = sb.clean[src % kBlockLen];
                }
            }
        } else {
            for (size_t i = order.size(); i > 1; --i) {
                size_t j = static_cast<size_t>(shuffle_rng.next() % i);
                std::swap(order[i - 1], order[j]);
            }
        }
        const std::vector<SymbolBlock>& pool = cfg.resample_blocks ? resampled : train_blocks;

        SplitMix64 noise_rng(derive_seed(cfg.seed, 0x700 + static_cast<uint64_t>(epoch)));

        double epoch_acc = 0.0;
        int64_t epoch_count = 0;
        for (size_t base = 0; base < order.size(); base += static_cast<size_t>(cfg.batch_size)) {
            const size_t n =
                std::min(static_cast<size_t>(cfg.batch_size), order.size() - base);
            batch.clear();
            for (size_t i = 0; i < n; ++i) {
                batch.push_back(cfg.resample_blocks ? pool[base + i] : pool[order[base + i]]);
            }

            Tensor x = pack_blocks(batch, cfg.iq_mode, true);
            Tensor t = pack_blocks(batch, cfg.iq_mode, false);
            if (cfg.aug_noise > 0.0) {
                // fresh corruption each epoch: the fixed interference codebook is
                // tiny relative to the corpus, so without jitter the recurrent
                // stage memorizes training sequences instead of the symbol map
                for (float& v : x.data) {
                    v += static_cast<float>(cfg.aug_noise * noise_rng.normal());
                }
            }
            opt.zero_grad();
            Tensor y = model.forward_batch(x, /*train=*/true);
            const double loss = mse_loss(y, t);
            if (!std::isfinite(loss)) {
                throw std::runtime_error("train: NaN/Inf loss at epoch " + std::to_string(epoch) +
                                         ", aborting");
            }
            epoch_acc += loss * static_cast<double>(y.numel());
            epoch_count += y.numel();
            model.backward_batch(mse_loss_grad(y, t));
            clip_grad_norm(model.parameters(), cfg.clip_norm);
            opt.step();
        }
        epochs_done = static_cast<uint64_t>(epoch);

        const double train_loss = epoch_acc / static_cast<double>(epoch_count);
        const double val_loss = dataset_loss(model, val_blocks, 256);
        res.curve.push_back({epoch, train_loss, val_loss});

        if (val_loss < best_val) {
            best_val = val_loss;
            best = Snapshot::take(model);
            best_epoch = epoch;
        } else if (cfg.patience > 0 && epoch - best_epoch >= cfg.patience) {
            break;
        }
    }

    best.restore(model);
    model.epochs_run = epochs_done;
    model.final_val_loss = best_val;
    res.epochs_run = epochs_done;
    res.best_val_loss = best_val;
    return res;
}

EvalReport evaluate_canceller(CancellerModel* model, DatasetReader& reader,
                              const QamConstellation& c, const ActivationQuantizer* aq) {
    if (reader.frame_count() == 0) throw std::invalid_argument("evaluate: empty split");
    EvalReport rep;
    int64_t total = 0, err_before = 0, err_after = 0;
    reader.for_each_frame([&](const ResourceGrid& corrupted, const ResourceGrid& clean,
                              uint64_t fid) {
        auto blocks = blockify(corrupted, clean, fid);
        std::vector<std::array<std::complex<float>, kBlockLen>> recovered;
        if (model) {
            recovered = model->forward_blocks(blocks, aq);
        } else {
            recovered.reserve(blocks.size());
            for (const auto& b : blocks) recovered.push_back(b.corrupted);
        }
        int64_t fb = 0, fa = 0, fn = 0;
        for (size_t bi = 0; bi < blocks.size(); ++bi) {
            for (int i = 0; i < kBlockLen; ++i) {
                const uint32_t tx = c.demap_hard({blocks[bi].clean[i].real(),
                                                  blocks[bi].clean[i].imag()});
                const uint32_t rb = c.demap_hard({blocks[bi].corrupted[i].real(),
                                                  blocks[bi].corrupted[i].imag()});
                const uint32_t ra = c.demap_hard({recovered[bi][i].real(),
                                                  recovered[bi][i].imag()});
                ++fn;
                if (rb != tx) ++fb;
                if (ra != tx) ++fa;
            }
        }
        rep.per_frame_before.push_back(static_cast<double>(fb) / static_cast<double>(fn));
        rep.per_frame_after.push_back(static_cast<double>(fa) / static_cast<double>(fn));
        total += fn;
        err_before += fb;
        err_after += fa;
    });
    rep.ser_before = static_cast<double>(err_before) / static_cast<double>(total);
    rep.ser_after = static_cast<double>(err_after) / static_cast<double>(total);
    return rep;
}

void dump_constellation(CancellerModel* model, std::span<const SymbolBlock> blocks,
                        size_t n_blocks, const std::filesystem::path& path) {
    n_blocks = std::min(n_blocks, blocks.size());
    auto subset = blocks.subspan(0, n_blocks);
    std::vector<std::array<std::complex<float>, kBlockLen>> recovered;
    if (model) {
        recovered = model->forward_blocks(subset);
    } else {
        for (const auto& b : subset) recovered.push_back(b.corrupted);
    }
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    f << "corrupted_i,corrupted_q,recovered_i,recovered_q,clean_i,clean_q\n";
    for (size_t b = 0; b < n_blocks; ++b) {
        for (int i = 0; i < kBlockLen; ++i) {
            f << subset[b].corrupted[i].real() << ',' << subset[b].corrupted[i].imag() << ','
              << recovered[b][i].real() << ',' << recovered[b][i].imag() << ','
              << subset[b].clean[i].real() << ',' << subset[b].clean[i].imag() << '\n';
        }
    }
}

// ------------------------------------------------------------- checkpoints

namespace {

constexpr char kCkptMagic[4] = {'D', 'I', 'C', 'M'};

void w_u64(std::string& s, uint64_t v) {
    for (int i = 0; i < 8; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

uint64_t r_u64(std::ifstream& f) {
    uint8_t b[8];
    f.read(reinterpret_cast<char*>(b), 8);
    if (!f) throw std::runtime_error("checkpoint truncated");
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(b[i]) << (8 * i);
    return v;
}

}  // namespace

void save_checkpoint(CancellerModel& model, const std::filesystem::path& path) {
    std::string body;
    const auto tensors = model.named_tensors();
    w_u64(body, model.epochs_run);
    double fv = model.final_val_loss;
    uint64_t fvbits;
    std::memcpy(&fvbits, &fv, 8);
    w_u64(body, fvbits);
    body.push_back(model.bn1a.stats_initialized ? 1 : 0);
    w_u64(body, tensors.size());
    for (auto& [name, t] : tensors) {
        w_u64(body, name.size());
        body.append(name);
        w_u64(body, t->shape.size());
        for (int64_t d : t->shape) w_u64(body, static_cast<uint64_t>(d));
        body.append(reinterpret_cast<const char*>(t->data.data()), t->data.size() * 4);
    }
    const uint32_t crc = crc32_ieee(reinterpret_cast<const uint8_t*>(body.data()), body.size());

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write checkpoint " + path.string());
    f.write(kCkptMagic, 4);
    const uint16_t version = 1;
    f.write(reinterpret_cast<const char*>(&version), 2);
    const uint8_t mode = static_cast<uint8_t>(model.iq_mode());
    f.write(reinterpret_cast<const char*>(&mode), 1);
    f.write(body.data(), static_cast<std::streamsize>(body.size()));
    f.write(reinterpret_cast<const char*>(&crc), 4);
    if (!f) throw std::runtime_error("write failure on checkpoint " + path.string());
}

std::unique_ptr<CancellerModel> load_checkpoint(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("checkpoint missing: " + path.string());
    char magic[4];
    f.read(magic, 4);
    if (!f || std::memcmp(magic, kCkptMagic, 4) != 0) {
        throw std::runtime_error("bad checkpoint magic in " + path.string());
    }
    uint16_t version;
    f.read(reinterpret_cast<char*>(&version), 2);
    if (!f || version != 1) {
        throw std::runtime_error("unsupported checkpoint version in " + path.string());
    }
    uint8_t mode_byte;
    f.read(reinterpret_cast<char*>(&mode_byte), 1);
    if (!f || mode_byte > 1) throw std::runtime_error("bad iq_mode byte in " + path.string());

    // read remainder, split off CRC
    std::string rest((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    if (rest.size() < 4) throw std::runtime_error("checkpoint truncated: " + path.string());
    uint32_t stored;
    std::memcpy(&stored, rest.data() + rest.size() - 4, 4);
    rest.resize(rest.size() - 4);
    if (crc32_ieee(reinterpret_cast<const uint8_t*>(rest.data()), rest.size()) != stored) {
        throw std::runtime_error("checkpoint corrupt (CRC mismatch): " + path.string());
    }

    size_t pos = 0;
    auto need = [&](size_t n) {
        if (pos + n > rest.size()) throw std::runtime_error("checkpoint truncated: " + path.string());
    };
    auto ru64 = [&]() {
        need(8);
        uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(static_cast<uint8_t>(rest[pos + i])) << (8 * i);
        pos += 8;
        return v;
    };

    auto model = std::make_unique<CancellerModel>(static_cast<IqMode>(mode_byte), 0);
    model->epochs_run = ru64();
    uint64_t fvbits = ru64();
    std::memcpy(&model->final_val_loss, &fvbits, 8);
    need(1);
    const bool stats_init = rest[pos++] != 0;
    const uint64_t count = ru64();

    auto tensors = model->named_tensors();
    if (count != tensors.size()) {
        throw std::runtime_error("checkpoint tensor count mismatch in " + path.string());
    }
    for (uint64_t i = 0; i < count; ++i) {
        const uint64_t name_len = ru64();
        need(name_len);
        std::string name = rest.substr(pos, name_len);
        pos += name_len;
        const uint64_t rank = ru64();
        std::vector<int64_t> shape(rank);
        for (auto& d : shape) d = static_cast<int64_t>(ru64());

        Tensor* dst = nullptr;
        for (auto& [n, t] : tensors) {
            if (n == name) { dst = t; break; }
        }
        if (!dst) throw std::runtime_error("unknown tensor '" + name + "' in " + path.string());
        if (dst->shape != shape) {
            throw std::runtime_error("shape mismatch for tensor '" + name + "' in " + path.string());
        }
        need(dst->data.size() * 4);
        std::memcpy(dst->data.data(), rest.data() + pos, dst->data.size() * 4);
        pos += dst->data.size() * 4;
    }
    for (BatchNorm1d* bn : {&model->bn1a, &model->bn1b, &model->bn2a, &model->bn2b,
                            &model->bn3a, &model->bn3b}) {
        bn->stats_initialized = stats_init;
    }
    return model;
}

void write_loss_curve_csv(const std::vector<LossPoint>& curve, const std::filesystem::path& path) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    f << "epoch,train_loss,val_loss\n";
    f.precision(10);
    for (const auto& p : curve) f << p.epoch << ',' << p.train_loss << ',' << p.val_loss << '\n';
}

}  // namespace dic
