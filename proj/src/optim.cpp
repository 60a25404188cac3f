#include "vtm/optim.hpp"

#include <cmath>

#include "vtm/errors.hpp"

namespace vtm::nn {

AdamW::AdamW(std::vector<ad::Tensor*> params, AdamWConfig config)
    : params_(std::move(params)), config_(config) {
    if (config_.lr < 0.0 || config_.beta1 < 0.0 || config_.beta1 >= 1.0 ||
        config_.beta2 < 0.0 || config_.beta2 >= 1.0 || config_.eps <= 0.0 ||
        config_.weight_decay < 0.0) {
        throw ConfigError("adamw: invalid hyperparameters");
    }
    m_.reserve(params_.size());
    v_.reserve(params_.size());
    for (const ad::Tensor* p : params_) {
        m_.emplace_back(static_cast<size_t>(p->size()), 0.0);
        v_.emplace_back(static_cast<size_t>(p->size()), 0.0);
    }
}

void AdamW::zero_grad() {
    for (ad::Tensor* p : params_) {
        p->zero_grad();
    }
}

void AdamW::step() {
    ++step_count_;
    const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(step_count_));
    const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(step_count_));
    for (size_t i = 0; i < params_.size(); ++i) {
        ad::Tensor* p = params_[i];
        auto& w = p->values();
        const auto& g = p->grad();
        const bool has_grad = g.size() == w.size();
        auto& m = m_[i];
        auto& v = v_[i];
        for (size_t j = 0; j < w.size(); ++j) {
            const double gj = has_grad ? g[j] : 0.0;
            m[j] = config_.beta1 * m[j] + (1.0 - config_.beta1) * gj;
            v[j] = config_.beta2 * v[j] + (1.0 - config_.beta2) * gj * gj;
            const double m_hat = m[j] / bc1;
            const double v_hat = v[j] / bc2;
            w[j] -= config_.lr * (m_hat / (std::sqrt(v_hat) + config_.eps) +
                                  config_.weight_decay * w[j]);
        }
    }
}

} // namespace vtm::nn
