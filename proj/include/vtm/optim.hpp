#pragma once

#include <vector>

#include "vtm/tensor.hpp"

namespace vtm::nn {

struct AdamWConfig {
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 1e-4; // decoupled, applied as lr * wd * w
};

// AdamW with bias-corrected moments and decoupled weight decay:
//   m <- b1 m + (1-b1) g,  v <- b2 v + (1-b2) g^2
//   w <- w - lr * ( m_hat / (sqrt(v_hat) + eps) + wd * w )
// Parameters with an unallocated gradient buffer are treated as g = 0.
class AdamW {
public:
    AdamW(std::vector<ad::Tensor*> params, AdamWConfig config);

    void set_lr(double lr) { config_.lr = lr; }
    double lr() const { return config_.lr; }
    const AdamWConfig& config() const { return config_; }
    long step_count() const { return step_count_; }

    void zero_grad();
    void step();

private:
    std::vector<ad::Tensor*> params_;
    AdamWConfig config_;
    long step_count_ = 0;
    std::vector<std::vector<double>> m_;
    std::vector<std::vector<double>> v_;
};

} // namespace vtm::nn
