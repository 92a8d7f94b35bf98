#include "dic/constellation.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace dic {

namespace {

bool is_power_of_four(int m) {
    if (m < 4) return false;
    while (m > 1) {
        if (m % 4 != 0) return false;
        m /= 4;
    }
    return true;
}

uint32_t gray_encode(uint32_t k) { return k ^ (k >> 1); }

}  // namespace

QamConstellation QamConstellation::build(int order) {
    if (!is_power_of_four(order) || order < 4 || order > 1024) {
        throw std::invalid_argument("QAM order must be a power of 4 in [4, 1024], got " +
                                    std::to_string(order));
    }
    QamConstellation c;
    c.order_ = order;
    c.bits_ = static_cast<int>(std::lround(std::log2(order)));
    c.side_ = 1 << (c.bits_ / 2);
    // Average energy of the raw {+-1, +-3, ...} grid is 2(M-1)/3.
    c.scale_ = 1.0 / std::sqrt(2.0 * (order - 1) / 3.0);

    c.levels_.resize(c.side_);
    c.level_bits_.resize(c.side_);
    for (int k = 0; k < c.side_; ++k) {
        c.levels_[k] = (2 * k - (c.side_ - 1)) * c.scale_;
        c.level_bits_[k] = gray_encode(static_cast<uint32_t>(k));
    }

    c.points_.resize(order);
    const int half_bits = c.bits_ / 2;
    for (int ki = 0; ki < c.side_; ++ki) {
        for (int kq = 0; kq < c.side_; ++kq) {
            uint32_t idx = (c.level_bits_[ki] << half_bits) | c.level_bits_[kq];
            c.points_[idx] = {c.levels_[ki], c.levels_[kq]};
        }
    }
    return c;
}

cplx QamConstellation::map(uint32_t index) const {
    if (index >= static_cast<uint32_t>(order_)) {
        throw std::out_of_range("symbol index " + std::to_string(index) +
                                " out of range for order " + std::to_string(order_));
    }
    return points_[index];
}

uint32_t QamConstellation::demap_hard(cplx point) const {
    if (!std::isfinite(point.real()) || !std::isfinite(point.imag())) {
        throw std::invalid_argument("demap_hard: non-finite input");
    }
    const int half_bits = bits_ / 2;

    // Nearest level per axis; a second candidate is kept on an exact tie so the
    // lowest-index rule can be applied over the (at most 4) combinations.
    auto axis_candidates = [&](double x, int out[2]) -> int {
        double u = (x / scale_ + (side_ - 1)) / 2.0;
        int k = static_cast<int>(std::lround(u));
        if (k < 0) k = 0;
        if (k >= side_) k = side_ - 1;
        out[0] = k;
        int n = 1;
        for (int alt : {k - 1, k + 1}) {
            if (alt < 0 || alt >= side_) continue;
            if (std::abs(x - levels_[alt]) == std::abs(x - levels_[k])) out[n++] = alt;
        }
        return n;
    };

    int ci[2], cq[2];
    int ni = axis_candidates(point.real(), ci);
    int nq = axis_candidates(point.imag(), cq);

    double best_d = std::numeric_limits<double>::infinity();
    uint32_t best_idx = 0;
    for (int a = 0; a < ni; ++a) {
        for (int b = 0; b < nq; ++b) {
            uint32_t idx = (level_bits_[ci[a]] << half_bits) | level_bits_[cq[b]];
            double d = std::norm(point - points_[idx]);
            if (d < best_d || (d == best_d && idx < best_idx)) {
                best_d = d;
                best_idx = idx;
            }
        }
    }
    return best_idx;
}

double symbol_error_rate(std::span<const uint32_t> tx, std::span<const uint32_t> rx) {
    if (tx.empty()) throw std::invalid_argument("symbol_error_rate: empty input");
    if (tx.size() != rx.size()) {
        throw std::invalid_argument("symbol_error_rate: length mismatch");
    }
    size_t errors = 0;
    for (size_t i = 0; i < tx.size(); ++i) {
        if (tx[i] != rx[i]) ++errors;
    }
    return static_cast<double>(errors) / static_cast<double>(tx.size());
}

}  // namespace dic
