#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

namespace dic {

using cplx = std::complex<double>;

// Square Gray-coded QAM constellation normalized to unit average energy.
// Symbol index layout: I-axis Gray bits in the high half, Q-axis in the low half.
class QamConstellation {
public:
    static QamConstellation build(int order);

    int order() const { return order_; }
    int bits_per_symbol() const { return bits_; }
    int levels_per_axis() const { return side_; }
    const std::vector<cplx>& points() const { return points_; }

    cplx map(uint32_t index) const;
    uint32_t demap_hard(cplx point) const;

private:
    QamConstellation() = default;

    int order_ = 0;
    int bits_ = 0;
    int side_ = 0;
    double scale_ = 1.0;  // 1/sqrt(2(M-1)/3)
    std::vector<cplx> points_;
    std::vector<double> levels_;           // PAM levels in ascending order
    std::vector<uint32_t> level_bits_;     // Gray bits of each level position
};

// Fraction of positions where tx and rx indices differ. Throws on empty or
// mismatched inputs.
double symbol_error_rate(std::span<const uint32_t> tx, std::span<const uint32_t> rx);

}  // namespace dic
