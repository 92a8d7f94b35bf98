#pragma once

#include <vector>

#include "dic/tensor.hpp"

namespace dic {

// Adam with bias correction over a fixed parameter list. Deterministic: the
// update visits parameters and elements in declaration order. weight_decay is
// decoupled (applied to the parameter directly, not folded into the gradient).
class Adam {
public:
    explicit Adam(std::vector<Tensor*> params, double lr = 1e-3, double beta1 = 0.9,
                  double beta2 = 0.999, double eps = 1e-8, double weight_decay = 0.0);

    void step();
    void zero_grad();

    double lr;
    double beta1, beta2, eps;
    double weight_decay;
    int64_t t = 0;

private:
    std::vector<Tensor*> params_;
    std::vector<std::vector<float>> m_, v_;
};

// Scales all gradients so the global L2 norm is at most max_norm.
// Returns the pre-clip norm.
double clip_grad_norm(const std::vector<Tensor*>& params, double max_norm);

}  // namespace dic
