#include "dic/layers.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

namespace dic {

namespace {

using MatRM = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapM = Eigen::Map<MatRM>;
using CMapM = Eigen::Map<const MatRM>;
using Stride = Eigen::OuterStride<Eigen::Dynamic>;

inline float sigmoidf(float v) { return 1.0f / (1.0f + std::exp(-v)); }

void check_rank3(const Tensor& x, const char* who) {
    if (x.shape.size() != 3) {
        throw std::invalid_argument(std::string(who) + ": expected rank-3 input, got " +
                                    x.shape_str());
    }
}

}  // namespace

bool Tensor::all_finite() const {
    for (float v : data) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

// ---------------------------------------------------------------- Conv1d

Conv1d::Conv1d(int in_ch_, int out_ch_, int kernel_)
    : weight({out_ch_, in_ch_, kernel_}), bias({out_ch_}),
      in_ch(in_ch_), out_ch(out_ch_), kernel(kernel_) {
    if (kernel != 1 && kernel % 2 == 0) {
        throw std::invalid_argument("Conv1d: kernel must be odd for same padding");
    }
    weight.enable_grad();
    bias.enable_grad();
}

void Conv1d::init(SplitMix64& rng) {
    const float bound = std::sqrt(1.0f / static_cast<float>(in_ch * kernel));
    for (auto& w : weight.data) w = static_cast<float>((rng.uniform() * 2.0 - 1.0) * bound);
    for (auto& b : bias.data) b = 0.0f;
}

Tensor Conv1d::forward(const Tensor& x) {
    check_rank3(x, "Conv1d");
    if (x.shape[1] != in_ch) {
        throw std::invalid_argument("Conv1d: channel mismatch, got " + x.shape_str());
    }
    const int64_t B = x.shape[0], L = x.shape[2];
    const int pad = kernel / 2;
    x_ = x;
    has_forward_ = true;

    Tensor y({B, out_ch, L});
    CMapM wm(weight.data.data(), out_ch, in_ch * kernel);
    MatRM col(in_ch * kernel, L);
    for (int64_t b = 0; b < B; ++b) {
        const float* xb = x.data.data() + b * in_ch * L;
        for (int c = 0; c < in_ch; ++c) {
            for (int kk = 0; kk < kernel; ++kk) {
                float* row = col.data() + (c * kernel + kk) * L;
                const int shift = kk - pad;
                for (int64_t t = 0; t < L; ++t) {
                    const int64_t src = t + shift;
                    row[t] = (src >= 0 && src < L) ? xb[c * L + src] : 0.0f;
                }
            }
        }
        MapM yb(y.data.data() + b * out_ch * L, out_ch, L);
        yb.noalias() = wm * col;
        for (int o = 0; o < out_ch; ++o) yb.row(o).array() += bias.data[o];
    }
    return y;
}

Tensor Conv1d::backward(const Tensor& gy) {
    if (!has_forward_) throw std::logic_error("Conv1d::backward without forward");
    const int64_t B = x_.shape[0], L = x_.shape[2];
    const int pad = kernel / 2;

    Tensor gx(x_.shape);
    CMapM wm(weight.data.data(), out_ch, in_ch * kernel);
    MapM gwm(weight.grad.data(), out_ch, in_ch * kernel);
    MatRM col(in_ch * kernel, L);
    MatRM dcol(in_ch * kernel, L);
    for (int64_t b = 0; b < B; ++b) {
        const float* xb = x_.data.data() + b * in_ch * L;
        for (int c = 0; c < in_ch; ++c) {
            for (int kk = 0; kk < kernel; ++kk) {
                float* row = col.data() + (c * kernel + kk) * L;
                const int shift = kk - pad;
                for (int64_t t = 0; t < L; ++t) {
                    const int64_t src = t + shift;
                    row[t] = (src >= 0 && src < L) ? xb[c * L + src] : 0.0f;
                }
            }
        }
        CMapM gyb(gy.data.data() + b * out_ch * L, out_ch, L);
        gwm.noalias() += gyb * col.transpose();
        for (int o = 0; o < out_ch; ++o) bias.grad[o] += gyb.row(o).sum();

        dcol.noalias() = wm.transpose() * gyb;
        float* gxb = gx.data.data() + b * in_ch * L;
        for (int c = 0; c < in_ch; ++c) {
            for (int kk = 0; kk < kernel; ++kk) {
                const float* row = dcol.data() + (c * kernel + kk) * L;
                const int shift = kk - pad;
                for (int64_t t = 0; t < L; ++t) {
                    const int64_t src = t + shift;
                    if (src >= 0 && src < L) gxb[c * L + src] += row[t];
                }
            }
        }
    }
    has_forward_ = false;
    return gx;
}

// ------------------------------------------------------------ BatchNorm1d

BatchNorm1d::BatchNorm1d(int channels_)
    : gamma({channels_}), beta({channels_}), running_mean({channels_}), running_var({channels_}),
      channels(channels_) {
    std::fill(gamma.data.begin(), gamma.data.end(), 1.0f);
    std::fill(running_var.data.begin(), running_var.data.end(), 1.0f);
    gamma.enable_grad();
    beta.enable_grad();
}

Tensor BatchNorm1d::forward(const Tensor& x, bool train) {
    check_rank3(x, "BatchNorm1d");
    if (x.shape[1] != channels) {
        throw std::invalid_argument("BatchNorm1d: channel mismatch, got " + x.shape_str());
    }
    const int64_t B = x.shape[0], L = x.shape[2], n = B * L;
    Tensor y(x.shape);

    if (!train) {
        if (!stats_initialized && !allow_default_stats) {
            throw std::logic_error("BatchNorm1d: inference before any training update");
        }
        for (int c = 0; c < channels; ++c) {
            const float inv = 1.0f / std::sqrt(running_var.data[c] + eps);
            const float g = gamma.data[c], bt = beta.data[c], mu = running_mean.data[c];
            for (int64_t b = 0; b < B; ++b) {
                const float* xp = x.data.data() + (b * channels + c) * L;
                float* yp = y.data.data() + (b * channels + c) * L;
                for (int64_t t = 0; t < L; ++t) yp[t] = g * (xp[t] - mu) * inv + bt;
            }
        }
        has_forward_ = false;
        return y;
    }

    xhat_ = Tensor(x.shape);
    invstd_.assign(channels, 0.0f);
    for (int c = 0; c < channels; ++c) {
        double sum = 0.0, sq = 0.0;
        for (int64_t b = 0; b < B; ++b) {
            const float* xp = x.data.data() + (b * channels + c) * L;
            for (int64_t t = 0; t < L; ++t) {
                sum += xp[t];
                sq += static_cast<double>(xp[t]) * xp[t];
            }
        }
        const double mu = sum / static_cast<double>(n);
        const double var = sq / static_cast<double>(n) - mu * mu;
        const float inv = static_cast<float>(1.0 / std::sqrt(var + eps));
        invstd_[c] = inv;
        const float g = gamma.data[c], bt = beta.data[c], muf = static_cast<float>(mu);
        for (int64_t b = 0; b < B; ++b) {
            const float* xp = x.data.data() + (b * channels + c) * L;
            float* hp = xhat_.data.data() + (b * channels + c) * L;
            float* yp = y.data.data() + (b * channels + c) * L;
            for (int64_t t = 0; t < L; ++t) {
                hp[t] = (xp[t] - muf) * inv;
                yp[t] = g * hp[t] + bt;
            }
        }
        running_mean.data[c] = (1.0f - momentum) * running_mean.data[c] +
                               momentum * static_cast<float>(mu);
        // unbiased variance for the running estimate
        const double unbiased = n > 1 ? var * static_cast<double>(n) / (n - 1) : var;
        running_var.data[c] = (1.0f - momentum) * running_var.data[c] +
                              momentum * static_cast<float>(unbiased);
    }
    stats_initialized = true;
    has_forward_ = true;
    return y;
}

Tensor BatchNorm1d::backward(const Tensor& gy) {
    if (!has_forward_) throw std::logic_error("BatchNorm1d::backward without train forward");
    const int64_t B = gy.shape[0], L = gy.shape[2], n = B * L;
    Tensor gx(gy.shape);
    for (int c = 0; c < channels; ++c) {
        double sum_gy = 0.0, sum_gy_xhat = 0.0;
        for (int64_t b = 0; b < B; ++b) {
            const float* gp = gy.data.data() + (b * channels + c) * L;
            const float* hp = xhat_.data.data() + (b * channels + c) * L;
            for (int64_t t = 0; t < L; ++t) {
                sum_gy += gp[t];
                sum_gy_xhat += static_cast<double>(gp[t]) * hp[t];
            }
        }
        gamma.grad[c] += static_cast<float>(sum_gy_xhat);
        beta.grad[c] += static_cast<float>(sum_gy);

        const float g_inv_n = gamma.data[c] * invstd_[c] / static_cast<float>(n);
        const float m_gy = static_cast<float>(sum_gy);
        const float m_gyx = static_cast<float>(sum_gy_xhat);
        for (int64_t b = 0; b < B; ++b) {
            const float* gp = gy.data.data() + (b * channels + c) * L;
            const float* hp = xhat_.data.data() + (b * channels + c) * L;
            float* op = gx.data.data() + (b * channels + c) * L;
            for (int64_t t = 0; t < L; ++t) {
                op[t] = g_inv_n * (static_cast<float>(n) * gp[t] - m_gy - hp[t] * m_gyx);
            }
        }
    }
    has_forward_ = false;
    return gx;
}

// ---------------------------------------------------------------- Relu

Tensor Relu::forward(const Tensor& x) {
    x_ = x;
    has_forward_ = true;
    Tensor y(x.shape);
    for (int64_t i = 0; i < x.numel(); ++i) y.data[i] = x.data[i] > 0.0f ? x.data[i] : 0.0f;
    return y;
}

Tensor Relu::backward(const Tensor& gy) {
    if (!has_forward_) throw std::logic_error("Relu::backward without forward");
    Tensor gx(x_.shape);
    for (int64_t i = 0; i < gx.numel(); ++i) gx.data[i] = x_.data[i] > 0.0f ? gy.data[i] : 0.0f;
    has_forward_ = false;
    return gx;
}

// ---------------------------------------------------------------- Lstm

Lstm::Lstm(int in_features_, int hidden_)
    : w_input({4 * hidden_, in_features_}), w_hidden({4 * hidden_, hidden_}),
      bias({4 * hidden_}), in_features(in_features_), hidden(hidden_) {
    w_input.enable_grad();
    w_hidden.enable_grad();
    bias.enable_grad();
}

void Lstm::init(SplitMix64& rng) {
    const float bound = std::sqrt(1.0f / static_cast<float>(in_features));
    for (auto& w : w_input.data) w = static_cast<float>((rng.uniform() * 2.0 - 1.0) * bound);
    const float hbound = std::sqrt(1.0f / static_cast<float>(hidden));
    for (auto& w : w_hidden.data) w = static_cast<float>((rng.uniform() * 2.0 - 1.0) * hbound);
    std::fill(bias.data.begin(), bias.data.end(), 0.0f);
    // forget-gate bias 1 keeps early gradients flowing through the cell path
    for (int j = hidden; j < 2 * hidden; ++j) bias.data[j] = 1.0f;
}

Tensor Lstm::forward(const Tensor& x) {
    check_rank3(x, "Lstm");
    if (x.shape[2] != in_features) {
        throw std::invalid_argument("Lstm: feature mismatch, got " + x.shape_str());
    }
    const int64_t B = x.shape[0], T = x.shape[1];
    batch_ = static_cast<int>(B);
    steps_ = static_cast<int>(T);
    x_ = x;
    has_forward_ = true;

    const auto cache_init = [&](std::vector<std::vector<float>>& v) {
        v.assign(T, std::vector<float>(B * hidden, 0.0f));
    };
    cache_init(gate_i_); cache_init(gate_f_); cache_init(gate_g_); cache_init(gate_o_);
    cache_init(cell_); cache_init(tanh_c_);

    Tensor y({B, T, hidden});
    CMapM wx(w_input.data.data(), 4 * hidden, in_features);
    CMapM wh(w_hidden.data.data(), 4 * hidden, hidden);

    MatRM h = MatRM::Zero(B, hidden);
    MatRM c = MatRM::Zero(B, hidden);
    MatRM pre(B, 4 * hidden);
    for (int t = 0; t < steps_; ++t) {
        Eigen::Map<const MatRM, 0, Stride> xt(x.data.data() + t * in_features, B, in_features,
                                              Stride(T * in_features));
        pre.noalias() = xt * wx.transpose();
        pre.noalias() += h * wh.transpose();
        pre.rowwise() += Eigen::Map<const Eigen::RowVectorXf>(bias.data.data(), 4 * hidden);

        for (int64_t b = 0; b < B; ++b) {
            const float* p = pre.data() + b * 4 * hidden;
            float* ci = gate_i_[t].data() + b * hidden;
            float* cf = gate_f_[t].data() + b * hidden;
            float* cg = gate_g_[t].data() + b * hidden;
            float* co = gate_o_[t].data() + b * hidden;
            float* cc = cell_[t].data() + b * hidden;
            float* ct = tanh_c_[t].data() + b * hidden;
            float* hp = h.data() + b * hidden;
            float* cp = c.data() + b * hidden;
            float* yp = y.data.data() + (b * T + t) * hidden;
            for (int j = 0; j < hidden; ++j) {
                const float gi = sigmoidf(p[j]);
                const float gf = sigmoidf(p[hidden + j]);
                const float gg = std::tanh(p[2 * hidden + j]);
                const float go = sigmoidf(p[3 * hidden + j]);
                const float cn = gf * cp[j] + gi * gg;
                const float tc = std::tanh(cn);
                ci[j] = gi; cf[j] = gf; cg[j] = gg; co[j] = go;
                cc[j] = cn; ct[j] = tc;
                cp[j] = cn;
                hp[j] = go * tc;
                yp[j] = hp[j];
            }
        }
    }
    return y;
}

Tensor Lstm::backward(const Tensor& gy) {
    if (!has_forward_) throw std::logic_error("Lstm::backward without forward");
    const int64_t B = batch_, T = steps_;
    Tensor gx(x_.shape);

    CMapM wx(w_input.data.data(), 4 * hidden, in_features);
    CMapM wh(w_hidden.data.data(), 4 * hidden, hidden);
    MapM gwx(w_input.grad.data(), 4 * hidden, in_features);
    MapM gwh(w_hidden.grad.data(), 4 * hidden, hidden);

    MatRM dh_next = MatRM::Zero(B, hidden);
    MatRM dc_next = MatRM::Zero(B, hidden);
    MatRM dpre(B, 4 * hidden);
    for (int t = steps_ - 1; t >= 0; --t) {
        for (int64_t b = 0; b < B; ++b) {
            const float* gyp = gy.data.data() + (b * T + t) * hidden;
            const float* ci = gate_i_[t].data() + b * hidden;
            const float* cf = gate_f_[t].data() + b * hidden;
            const float* cg = gate_g_[t].data() + b * hidden;
            const float* co = gate_o_[t].data() + b * hidden;
            const float* ct = tanh_c_[t].data() + b * hidden;
            const float* cprev = t > 0 ? cell_[t - 1].data() + b * hidden : nullptr;
            float* dhn = dh_next.data() + b * hidden;
            float* dcn = dc_next.data() + b * hidden;
            float* dp = dpre.data() + b * 4 * hidden;
            for (int j = 0; j < hidden; ++j) {
                const float dh = gyp[j] + dhn[j];
                const float d_o = dh * ct[j];
                const float dc = dcn[j] + dh * co[j] * (1.0f - ct[j] * ct[j]);
                const float cp = cprev ? cprev[j] : 0.0f;
                const float di = dc * cg[j];
                const float df = dc * cp;
                const float dg = dc * ci[j];
                dp[j] = di * ci[j] * (1.0f - ci[j]);
                dp[hidden + j] = df * cf[j] * (1.0f - cf[j]);
                dp[2 * hidden + j] = dg * (1.0f - cg[j] * cg[j]);
                dp[3 * hidden + j] = d_o * co[j] * (1.0f - co[j]);
                dcn[j] = dc * cf[j];
            }
        }

        Eigen::Map<const MatRM, 0, Stride> xt(x_.data.data() + t * in_features, B, in_features,
                                              Stride(T * in_features));
        gwx.noalias() += dpre.transpose() * xt;
        if (t > 0) {
            // h_{t-1} = o_{t-1} * tanh(c_{t-1})
            MatRM hprev(B, hidden);
            for (int64_t b = 0; b < B; ++b) {
                const float* co = gate_o_[t - 1].data() + b * hidden;
                const float* ct = tanh_c_[t - 1].data() + b * hidden;
                float* hp = hprev.data() + b * hidden;
                for (int j = 0; j < hidden; ++j) hp[j] = co[j] * ct[j];
            }
            gwh.noalias() += dpre.transpose() * hprev;
        }
        for (int64_t b = 0; b < B; ++b) {
            const float* dp = dpre.data() + b * 4 * hidden;
            for (int j = 0; j < 4 * hidden; ++j) bias.grad[j] += dp[j];
        }

        Eigen::Map<MatRM, 0, Stride> gxt(gx.data.data() + t * in_features, B, in_features,
                                         Stride(T * in_features));
        gxt.noalias() = dpre * wx;
        dh_next.noalias() = dpre * wh;
    }
    has_forward_ = false;
    return gx;
}

// ---------------------------------------------------------------- losses etc.

double mse_loss(const Tensor& pred, const Tensor& target) {
    if (!pred.same_shape(target)) throw std::invalid_argument("mse_loss: shape mismatch");
    double acc = 0.0;
    for (int64_t i = 0; i < pred.numel(); ++i) {
        const double d = static_cast<double>(pred.data[i]) - target.data[i];
        acc += d * d;
    }
    return acc / static_cast<double>(pred.numel());
}

Tensor mse_loss_grad(const Tensor& pred, const Tensor& target) {
    if (!pred.same_shape(target)) throw std::invalid_argument("mse_loss: shape mismatch");
    Tensor g(pred.shape);
    const float scale = 2.0f / static_cast<float>(pred.numel());
    for (int64_t i = 0; i < pred.numel(); ++i) {
        g.data[i] = scale * (pred.data[i] - target.data[i]);
    }
    return g;
}

Tensor transpose_cl(const Tensor& x) {
    check_rank3(x, "transpose_cl");
    const int64_t B = x.shape[0], C = x.shape[1], L = x.shape[2];
    Tensor y({B, L, C});
    for (int64_t b = 0; b < B; ++b) {
        const float* xb = x.data.data() + b * C * L;
        float* yb = y.data.data() + b * C * L;
        for (int64_t c = 0; c < C; ++c) {
            for (int64_t t = 0; t < L; ++t) yb[t * C + c] = xb[c * L + t];
        }
    }
    return y;
}

}  // namespace dic
