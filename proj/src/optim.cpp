#include "dic/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace dic {

Adam::Adam(std::vector<Tensor*> params, double lr_, double beta1_, double beta2_, double eps_,
           double weight_decay_)
    : lr(lr_), beta1(beta1_), beta2(beta2_), eps(eps_), weight_decay(weight_decay_),
      params_(std::move(params)) {
    for (Tensor* p : params_) {
        if (p->grad.size() != p->data.size()) {
            throw std::invalid_argument("Adam: parameter has no gradient buffer");
        }
        m_.emplace_back(p->data.size(), 0.0f);
        v_.emplace_back(p->data.size(), 0.0f);
    }
}

void Adam::step() {
    ++t;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t));
    for (size_t i = 0; i < params_.size(); ++i) {
        Tensor* p = params_[i];
        auto& m = m_[i];
        auto& v = v_[i];
        for (size_t j = 0; j < p->data.size(); ++j) {
            const double g = p->grad[j];
            const double mn = beta1 * m[j] + (1.0 - beta1) * g;
            const double vn = beta2 * v[j] + (1.0 - beta2) * g * g;
            m[j] = static_cast<float>(mn);
            v[j] = static_cast<float>(vn);
            const double mhat = mn / bc1;
            const double vhat = vn / bc2;
            const double decayed = p->data[j] * (1.0 - lr * weight_decay);
            p->data[j] = static_cast<float>(decayed - lr * mhat / (std::sqrt(vhat) + eps));
        }
    }
}

void Adam::zero_grad() {
    for (Tensor* p : params_) p->zero_grad();
}

double clip_grad_norm(const std::vector<Tensor*>& params, double max_norm) {
    double sq = 0.0;
    for (const Tensor* p : params) {
        for (float g : p->grad) sq += static_cast<double>(g) * g;
    }
    const double norm = std::sqrt(sq);
    if (norm > max_norm && norm > 0.0) {
        const float scale = static_cast<float>(max_norm / norm);
        for (Tensor* p : params) {
            for (float& g : p->grad) g *= scale;
        }
    }
    return norm;
}

}  // namespace dic
