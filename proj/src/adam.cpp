#include "tae/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace tae::nn {

AdamState::AdamState(AdamHyper hyper, std::span<Tensor* const> params)
    : hyper_(hyper)
{
    m_.reserve(params.size());
    v_.reserve(params.size());
    for (const Tensor* p : params) {
        m_.emplace_back(p->size(), 0.0);
        v_.emplace_back(p->size(), 0.0);
    }
}

void AdamState::update(std::span<Tensor* const> params)
{
    if (params.size() != m_.size()) throw std::invalid_argument("adam: parameter list changed since construction");
    ++step_;
    const double t = static_cast<double>(step_);
    const double bc1 = 1.0 - std::pow(hyper_.beta1, t);
    const double bc2 = 1.0 - std::pow(hyper_.beta2, t);
    for (std::size_t p = 0; p < params.size(); ++p) {
        auto& values = params[p]->values();
        const auto& grad = params[p]->grad();
        auto& m = m_[p];
        auto& v = v_[p];
        if (m.size() != values.size()) throw std::invalid_argument("adam: parameter size changed since construction");
        for (std::size_t i = 0; i < values.size(); ++i) {
            const double gi = grad[i];
            m[i] = hyper_.beta1 * m[i] + (1.0 - hyper_.beta1) * gi;
            v[i] = hyper_.beta2 * v[i] + (1.0 - hyper_.beta2) * gi * gi;
            const double m_hat = m[i] / bc1;
            const double v_hat = v[i] / bc2;
            values[i] -= hyper_.learning_rate * m_hat / (std::sqrt(v_hat) + hyper_.epsilon);
        }
    }
}

}  // namespace tae::nn
