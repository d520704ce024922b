#pragma once

#include <cstdint>
#include <vector>

#include "ffmct/tensor.hpp"

namespace ffmct {

struct AdamConfig {
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

// Standard bias-corrected Adam over a fixed parameter list. Moment buffers
// are exposed for checkpointing.
class AdamOptimizer {
public:
    AdamOptimizer(std::vector<Tensor> params, AdamConfig cfg);

    // One in-place update from the parameters' accumulated gradients. A
    // parameter with no gradient buffer contributes g = 0.
    void step();
    void zero_grad();

    std::int64_t step_count() const { return step_count_; }
    const AdamConfig& config() const { return cfg_; }
    const std::vector<Tensor>& params() const { return params_; }
    std::vector<std::vector<double>>& first_moments() { return m_; }
    std::vector<std::vector<double>>& second_moments() { return v_; }
    void set_step_count(std::int64_t n);

private:
    std::vector<Tensor> params_;
    AdamConfig cfg_;
    std::int64_t step_count_ = 0;
    std::vector<std::vector<double>> m_;
    std::vector<std::vector<double>> v_;
};

}  // namespace ffmct
