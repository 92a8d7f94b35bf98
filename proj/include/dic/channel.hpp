#pragma once

#include <cstdint>
#include <limits>
#include <string>

#include "dic/phy.hpp"

namespace dic {

enum class GainScope : uint8_t { per_dataset = 0, per_frame = 1, per_block = 2 };

GainScope gain_scope_from_string(const std::string& s);
std::string to_string(GainScope s);

struct InterferenceConfig {
    int interferer_order = 0;  // 0 = same as victim
    double sir_db = std::numeric_limits<double>::infinity();  // +inf = off
    GainScope gain_scope = GainScope::per_dataset;
    uint64_t seed = 0;

    bool enabled() const { return std::isfinite(sir_db); }
};

struct NoiseConfig {
    double snr_db = std::numeric_limits<double>::infinity();  // +inf = off

    bool enabled() const { return std::isfinite(snr_db); }
};

struct InterferenceResult {
    ResourceGrid corrupted;
    ResourceGrid interferer_truth;
};

// Adds y = x + g*i per resource element, g = A*exp(j*phi) with
// A = 10^(-sir_db/20), phi uniform in [0, 2pi) redrawn once per gain-scope
// unit. frame_id selects the per-frame symbol stream and, for per_frame scope,
// the phase.
InterferenceResult apply_interference(const ResourceGrid& grid, const InterferenceConfig& cfg,
                                      const QamConstellation& victim, uint64_t frame_id,
                                      int block_len = 64);

// Circularly-symmetric complex Gaussian noise with per-RE variance 10^(-snr_db/10).
ResourceGrid apply_awgn(const ResourceGrid& grid, const NoiseConfig& cfg, uint64_t seed);

// Bisection over sir_db in [-10, 50] until the Monte-Carlo SER of hard
// decisions on corrupted REs is within +-0.01 of target_ser. Throws if the
// target lies outside the bracket.
double calibrate_sir(double target_ser, const QamConstellation& c, const InterferenceConfig& tmpl,
                     int64_t trials);

// Monte-Carlo SER of hard decisions at a given SIR (helper shared with tests).
double measure_interference_ser(double sir_db, const QamConstellation& c,
                                const InterferenceConfig& tmpl, int64_t trials);

}  // namespace dic
