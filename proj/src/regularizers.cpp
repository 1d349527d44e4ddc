#include "tae/regularizers.hpp"

#include "tae/special.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>
#include <tuple>

namespace tae {

namespace {

constexpr double tau = 2.0 * std::numbers::pi;
constexpr double angle_slack = 1e-9;

void require_matrix(const Tensor& t, const char* who)
{
    if (t.rank() != 2) throw ShapeError(std::string(who) + " expects an S x d matrix, got " + shape_string(t.shape()));
}

}  // namespace

SortedColumns sort_columns(const Tensor& values)
{
    require_matrix(values, "sort_columns");
    const std::size_t S = values.dim(0), d = values.dim(1);
    SortedColumns out{Tensor(values.shape()), {}};
    out.perm.order.resize(d);
    for (std::size_t i = 0; i < d; ++i) {
        auto& order = out.perm.order[i];
        order.resize(S);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return values.at(a, i) < values.at(b, i); });
        for (std::size_t s = 0; s < S; ++s) out.sorted.at(s, i) = values.at(order[s], i);
    }
    return out;
}

Var spring_loss(Graph& g, Var phi)
{
    const Tensor& angles = g.value(phi);
    require_matrix(angles, "spring_loss");
    for (double a : angles.values())
        if (!(a >= -std::numbers::pi - angle_slack && a <= std::numbers::pi + angle_slack))
            throw std::domain_error("spring_loss: angle " + std::to_string(a) +
                                    " outside [-pi, pi]; wrap angles before the loss");

    const std::size_t S = angles.dim(0), d = angles.dim(1);
    SortedColumns sorted = sort_columns(angles);
    double loss = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        const double wrap = sorted.sorted.at(0, i) + tau - sorted.sorted.at(S - 1, i);
        loss += wrap * wrap;
        for (std::size_t s = 0; s + 1 < S; ++s) {
            const double gap = sorted.sorted.at(s, i) - sorted.sorted.at(s + 1, i);
            loss += gap * gap;
        }
    }

    return g.record("spring_loss", Tensor::scalar(loss), {phi},
                    [phi, S, d, sorted = std::move(sorted)](Graph& g, const Tensor& self) {
                        const double seed = self.grad()[0];
                        auto& dphi = g.grad(phi);
                        const Tensor& v = sorted.sorted;
                        for (std::size_t i = 0; i < d; ++i) {
                            const auto& order = sorted.perm.order[i];
                            auto at = [&](std::size_t s) -> double& { return dphi[order[s] * d + i]; };
                            const double wrap = v.at(0, i) + tau - v.at(S - 1, i);
                            at(0) += 2.0 * wrap * seed;
                            at(S - 1) -= 2.0 * wrap * seed;
                            for (std::size_t s = 0; s + 1 < S; ++s) {
                                const double gap = v.at(s, i) - v.at(s + 1, i);
                                at(s) += 2.0 * gap * seed;
                                at(s + 1) -= 2.0 * gap * seed;
                            }
                        }
                    });
}

double spring_loss_minimum(std::size_t batch)
{
    return tau * tau / static_cast<double>(batch);
}

QuantileTargets quantile_targets(std::size_t batch, double mu, double sigma)
{
    if (batch == 0) throw std::invalid_argument("quantile_targets: batch size must be positive");
    QuantileTargets t;
    t.mu = mu;
    t.sigma = sigma;
    t.q.resize(batch);
    const double S = static_cast<double>(batch);
    for (std::size_t s = 0; s < batch; ++s) t.q[s] = inverse_normal_cdf((static_cast<double>(s) + 0.5) / S, mu, sigma);
    return t;
}

std::shared_ptr<const QuantileTargets> cached_quantile_targets(std::size_t batch, double mu, double sigma)
{
    static std::mutex guard;
    static std::map<std::tuple<std::size_t, double, double>, std::shared_ptr<const QuantileTargets>> cache;
    std::lock_guard lock(guard);
    auto& slot = cache[{batch, mu, sigma}];
    if (!slot) slot = std::make_shared<const QuantileTargets>(quantile_targets(batch, mu, sigma));
    return slot;
}

Var quantile_loss(Graph& g, Var rho, const QuantileTargets& targets)
{
    const Tensor& values = g.value(rho);
    require_matrix(values, "quantile_loss");
    const std::size_t S = values.dim(0), d = values.dim(1);
    if (targets.q.size() != S)
        throw ShapeError("quantile_loss: " + std::to_string(targets.q.size()) + " targets for a batch of " +
                         std::to_string(S));

    SortedColumns sorted = sort_columns(values);
    double loss = 0.0;
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t s = 0; s < S; ++s) {
            const double diff = sorted.sorted.at(s, i) - targets.q[s];
            loss += diff * diff;
        }

    return g.record("quantile_loss", Tensor::scalar(loss), {rho},
                    [rho, S, d, q = targets.q, sorted = std::move(sorted)](Graph& g, const Tensor& self) {
                        const double seed = self.grad()[0];
                        auto& drho = g.grad(rho);
                        for (std::size_t i = 0; i < d; ++i) {
                            const auto& order = sorted.perm.order[i];
                            for (std::size_t s = 0; s < S; ++s)
                                drho[order[s] * d + i] += 2.0 * (sorted.sorted.at(s, i) - q[s]) * seed;
                        }
                    });
}

}  // namespace tae
