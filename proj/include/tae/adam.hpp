#pragma once

#include "tae/tensor.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace tae::nn {

struct AdamHyper {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// Moment buffers for a fixed, ordered list of parameter tensors.
class AdamState {
public:
    AdamState() = default;
    AdamState(AdamHyper hyper, std::span<Tensor* const> params);

    const AdamHyper& hyper() const { return hyper_; }
    std::uint64_t step() const { return step_; }
    const std::vector<std::vector<double>>& first_moment() const { return m_; }
    const std::vector<std::vector<double>>& second_moment() const { return v_; }

    /// Bias-corrected Adam update from each tensor's grad buffer. Grads are left untouched.
    void update(std::span<Tensor* const> params);

private:
    AdamHyper hyper_;
    std::uint64_t step_ = 0;
    std::vector<std::vector<double>> m_;
    std::vector<std::vector<double>> v_;
};

}  // namespace tae::nn
