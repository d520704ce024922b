#include "ffmct/adam.hpp"

#include <cmath>

namespace ffmct {

AdamOptimizer::AdamOptimizer(std::vector<Tensor> params, AdamConfig cfg)
    : params_(std::move(params)), cfg_(cfg) {
    FFMCT_CHECK_ARG(cfg_.lr > 0 && cfg_.epsilon > 0, "adam: lr and epsilon must be positive");
    FFMCT_CHECK_ARG(cfg_.beta1 >= 0 && cfg_.beta1 < 1 && cfg_.beta2 >= 0 && cfg_.beta2 < 1,
                    "adam: betas must lie in [0,1)");
    m_.reserve(params_.size());
    v_.reserve(params_.size());
    for (const auto& p : params_) {
        FFMCT_CHECK_ARG(p.defined() && p.requires_grad(), "adam: parameters must require grad");
        m_.emplace_back(p.numel(), 0.0);
        v_.emplace_back(p.numel(), 0.0);
    }
}

void AdamOptimizer::step() {
    ++step_count_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_count_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_count_));
    for (size_t pi = 0; pi < params_.size(); ++pi) {
        auto data = params_[pi].mutable_data();
        const bool has_grad = params_[pi].has_grad();
        std::span<const double> grad;
        if (has_grad) {
            grad = params_[pi].grad();
            check_finite(grad, "adam: gradient");
        }
        auto& m = m_[pi];
        auto& v = v_[pi];
        for (size_t i = 0; i < data.size(); ++i) {
            const double g = has_grad ? grad[i] : 0.0;
            m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g;
            v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g * g;
            const double m_hat = m[i] / bc1;
            const double v_hat = v[i] / bc2;
            data[i] -= cfg_.lr * m_hat / (std::sqrt(v_hat) + cfg_.epsilon);
        }
    }
}

void AdamOptimizer::zero_grad() {
    for (auto& p : params_) p.zero_grad();
}

void AdamOptimizer::set_step_count(std::int64_t n) {
    FFMCT_CHECK_ARG(n >= 0, "adam: step count must be non-negative");
    step_count_ = n;
}

}  // namespace ffmct
