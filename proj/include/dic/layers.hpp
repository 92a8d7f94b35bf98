#pragma once

#include <vector>

#include "dic/rng.hpp"
#include "dic/tensor.hpp"

namespace dic {

// Layers own their parameters and gradients and cache whatever the analytic
// backward pass needs. backward() must follow a forward() on the same input.

class Conv1d {
public:
    // kernel size 1 or odd with zero same-padding; stride fixed at 1
    Conv1d(int in_ch, int out_ch, int kernel);

    Tensor forward(const Tensor& x);            // x: [B, in_ch, L] -> [B, out_ch, L]
    Tensor backward(const Tensor& gy);          // accumulates weight/bias grads

    void init(SplitMix64& rng);
    std::vector<Tensor*> parameters() { return {&weight, &bias}; }

    Tensor weight;  // [out_ch, in_ch, k]
    Tensor bias;    // [out_ch]
    int in_ch, out_ch, kernel;

private:
    Tensor x_;  // cached input
    bool has_forward_ = false;
};

class BatchNorm1d {
public:
    explicit BatchNorm1d(int channels);

    Tensor forward(const Tensor& x, bool train);  // x: [B, C, L]
    Tensor backward(const Tensor& gy);

    std::vector<Tensor*> parameters() { return {&gamma, &beta}; }

    Tensor gamma, beta;               // [C]
    Tensor running_mean, running_var; // [C]
    int channels;
    float eps = 1e-5f;
    float momentum = 0.1f;
    bool stats_initialized = false;
    // When set, inference on a never-trained layer uses the construction
    // defaults (mean 0, var 1) instead of throwing.
    bool allow_default_stats = false;

private:
    Tensor xhat_;
    std::vector<float> invstd_;
    bool has_forward_ = false;
};

class Relu {
public:
    Tensor forward(const Tensor& x);
    Tensor backward(const Tensor& gy);

private:
    Tensor x_;
    bool has_forward_ = false;
};

// Single-layer LSTM over [B, T, in] -> [B, T, hidden], zero initial state.
// Gate order in the stacked parameter rows: input, forget, cell, output.
class Lstm {
public:
    Lstm(int in_features, int hidden);

    Tensor forward(const Tensor& x);
    Tensor backward(const Tensor& gy);

    void init(SplitMix64& rng);
    std::vector<Tensor*> parameters() { return {&w_input, &w_hidden, &bias}; }

    Tensor w_input;   // [4H, in]
    Tensor w_hidden;  // [4H, H]
    Tensor bias;      // [4H]
    int in_features, hidden;

private:
    Tensor x_;
    // per-timestep caches, each [B, H]
    std::vector<std::vector<float>> gate_i_, gate_f_, gate_g_, gate_o_, cell_, tanh_c_;
    int batch_ = 0, steps_ = 0;
    bool has_forward_ = false;
};

// Mean-reduction MSE; gradient w.r.t. pred is 2(pred-target)/count.
double mse_loss(const Tensor& pred, const Tensor& target);
Tensor mse_loss_grad(const Tensor& pred, const Tensor& target);

// [B, C, L] <-> [B, L, C] permutation (channels-as-features for the LSTM stack).
Tensor transpose_cl(const Tensor& x);

}  // namespace dic
