#include "dic/phy.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "dic/rng.hpp"

namespace dic {

void OfdmConfig::validate() const {
    if (fft_size <= 0 || (fft_size & (fft_size - 1)) != 0) {
        throw std::invalid_argument("fft_size must be a power of two");
    }
    if (fft_size < active_subcarriers + 1) {
        throw std::invalid_argument("fft_size must be >= active_subcarriers + 1");
    }
    if (cp_length < 0 || cp_length >= fft_size) {
        throw std::invalid_argument("cp_length must be in [0, fft_size)");
    }
    if (active_subcarriers <= 0 || active_subcarriers % 2 != 0) {
        throw std::invalid_argument("active_subcarriers must be positive and even");
    }
}

void fft_inplace(std::vector<cplx>& x, bool inverse) {
    const size_t n = x.size();
    if (n == 0 || (n & (n - 1)) != 0) throw std::invalid_argument("fft size must be a power of two");

    // bit reversal
    for (size_t i = 1, j = 0; i < n; ++i) {
        size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(x[i], x[j]);
    }
    const double sign = inverse ? 1.0 : -1.0;
    for (size_t len = 2; len <= n; len <<= 1) {
        const double ang = sign * 2.0 * std::numbers::pi / static_cast<double>(len);
        const cplx wlen(std::cos(ang), std::sin(ang));
        for (size_t i = 0; i < n; i += len) {
            cplx w(1.0, 0.0);
            for (size_t j = 0; j < len / 2; ++j) {
                cplx u = x[i + j];
                cplx v = x[i + j + len / 2] * w;
                x[i + j] = u + v;
                x[i + j + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
}

namespace {

// Active subcarrier a in [0, n_active) -> FFT bin. The first half occupies the
// negative frequencies -n/2..-1, the second half +1..+n/2; DC stays empty.
inline int active_to_bin(int a, int n_active, int fft_size) {
    const int half = n_active / 2;
    if (a < half) return fft_size - half + a;
    return a - half + 1;
}

}  // namespace

std::vector<cplx> ofdm_modulate(const ResourceGrid& grid, const OfdmConfig& cfg) {
    cfg.validate();
    if (grid.dims.subcarriers != cfg.active_subcarriers) {
        throw std::invalid_argument("grid subcarrier count does not match OFDM config");
    }
    const int64_t n_sym = grid.dims.ofdm_symbols_total();
    const int n = cfg.fft_size;
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));

    std::vector<cplx> out;
    out.reserve(n_sym * cfg.samples_per_symbol());
    std::vector<cplx> freq(n);
    for (int64_t s = 0; s < n_sym; ++s) {
        std::fill(freq.begin(), freq.end(), cplx{});
        const cplx* row = grid.data.data() + s * grid.dims.subcarriers;
        for (int a = 0; a < cfg.active_subcarriers; ++a) {
            freq[active_to_bin(a, cfg.active_subcarriers, n)] = row[a];
        }
        fft_inplace(freq, /*inverse=*/true);
        // cyclic prefix: last cp_length body samples first
        for (int i = n - cfg.cp_length; i < n; ++i) out.push_back(freq[i] * scale);
        for (int i = 0; i < n; ++i) out.push_back(freq[i] * scale);
    }
    return out;
}

ResourceGrid ofdm_demodulate(const std::vector<cplx>& samples, const OfdmConfig& cfg,
                             const GridDims& dims) {
    cfg.validate();
    if (dims.subcarriers != cfg.active_subcarriers) {
        throw std::invalid_argument("grid subcarrier count does not match OFDM config");
    }
    const int64_t n_sym = dims.ofdm_symbols_total();
    if (static_cast<int64_t>(samples.size()) != n_sym * cfg.samples_per_symbol()) {
        throw std::invalid_argument("sample count does not match dims and OFDM config");
    }
    const int n = cfg.fft_size;
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));

    ResourceGrid grid(dims);
    std::vector<cplx> body(n);
    for (int64_t s = 0; s < n_sym; ++s) {
        const cplx* sym = samples.data() + s * cfg.samples_per_symbol() + cfg.cp_length;
        std::copy(sym, sym + n, body.begin());
        fft_inplace(body, /*inverse=*/false);
        cplx* row = grid.data.data() + s * dims.subcarriers;
        for (int a = 0; a < cfg.active_subcarriers; ++a) {
            row[a] = body[active_to_bin(a, cfg.active_subcarriers, n)] * scale;
        }
    }
    return grid;
}

RandomGrid fill_grid_random(const GridDims& dims, const QamConstellation& c, uint64_t seed) {
    if (!dims.valid()) throw std::invalid_argument("invalid grid dims");
    RandomGrid out{ResourceGrid(dims), {}};
    out.indices.resize(dims.symbols_total());
    SplitMix64 rng(seed);
    const uint64_t mask = static_cast<uint64_t>(c.order()) - 1;  // order is a power of two
    for (int64_t i = 0; i < dims.symbols_total(); ++i) {
        uint32_t idx = static_cast<uint32_t>(rng.next() & mask);
        out.indices[i] = idx;
        out.grid.data[i] = c.map(idx);
    }
    return out;
}

}  // namespace dic
