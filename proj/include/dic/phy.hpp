#pragma once

#include <cstdint>
#include <vector>

#include "dic/constellation.hpp"

namespace dic {

struct GridDims {
    int subframes = 11;
    int ofdm_symbols = 140;
    int subcarriers = 180;

    int64_t symbols_total() const {
        return static_cast<int64_t>(subframes) * ofdm_symbols * subcarriers;
    }
    int64_t ofdm_symbols_total() const {
        return static_cast<int64_t>(subframes) * ofdm_symbols;
    }
    bool valid() const { return subframes > 0 && ofdm_symbols > 0 && subcarriers > 0; }
};

// One radio frame of resource elements, row-major (subframe, ofdm_symbol, subcarrier).
struct ResourceGrid {
    GridDims dims;
    std::vector<cplx> data;

    explicit ResourceGrid(GridDims d = {}) : dims(d), data(d.symbols_total()) {}

    cplx& at(int sf, int sym, int sc) {
        return data[(static_cast<int64_t>(sf) * dims.ofdm_symbols + sym) * dims.subcarriers + sc];
    }
    const cplx& at(int sf, int sym, int sc) const {
        return data[(static_cast<int64_t>(sf) * dims.ofdm_symbols + sym) * dims.subcarriers + sc];
    }
};

struct OfdmConfig {
    int fft_size = 256;
    int cp_length = 18;
    double subcarrier_spacing_hz = 15000.0;
    int active_subcarriers = 180;  // centered around DC, DC excluded

    int samples_per_symbol() const { return fft_size + cp_length; }
    void validate() const;
};

// Grid -> cyclic-prefixed time samples, one OFDM symbol per grid row, unitary IDFT.
std::vector<cplx> ofdm_modulate(const ResourceGrid& grid, const OfdmConfig& cfg);

// Inverse of ofdm_modulate for a flat channel.
ResourceGrid ofdm_demodulate(const std::vector<cplx>& samples, const OfdmConfig& cfg,
                             const GridDims& dims);

// Fills every resource element with an independent uniform-random constellation
// point. Returns the grid and the ground-truth indices in row-major order.
struct RandomGrid {
    ResourceGrid grid;
    std::vector<uint32_t> indices;
};
RandomGrid fill_grid_random(const GridDims& dims, const QamConstellation& c, uint64_t seed);

// Radix-2 in-place FFT helpers (size must be a power of two). Unscaled.
void fft_inplace(std::vector<cplx>& x, bool inverse);

}  // namespace dic
