#include "tae/polar.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace tae {

PolarVars to_polar(Graph& g, Var x, Var y)
{
    const Tensor& tx = g.value(x);
    const Tensor& ty = g.value(y);
    if (tx.shape() != ty.shape())
        throw ShapeError("to_polar: X " + shape_string(tx.shape()) + " and Y " + shape_string(ty.shape()) + " differ");

    Tensor rho(tx.shape());
    Tensor phi(tx.shape());
    for (std::size_t i = 0; i < tx.size(); ++i) {
        rho[i] = tx[i] * tx[i] + ty[i] * ty[i];
        phi[i] = std::atan2(ty[i], tx[i]);
    }

    Var r = g.record("polar_rho", std::move(rho), {x, y}, [x, y](Graph& g, const Tensor& self) {
        const auto& vx = g.value(x).values();
        const auto& vy = g.value(y).values();
        if (g.needs_grad(x)) {
            auto& dx = g.grad(x);
            for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += 2.0 * vx[i] * self.grad()[i];
        }
        if (g.needs_grad(y)) {
            auto& dy = g.grad(y);
            for (std::size_t i = 0; i < dy.size(); ++i) dy[i] += 2.0 * vy[i] * self.grad()[i];
        }
    });

    Var a = g.record("polar_phi", std::move(phi), {x, y}, [x, y](Graph& g, const Tensor& self) {
        const auto& vx = g.value(x).values();
        const auto& vy = g.value(y).values();
        const bool want_x = g.needs_grad(x), want_y = g.needs_grad(y);
        for (std::size_t i = 0; i < vx.size(); ++i) {
            const double denom = vx[i] * vx[i] + vy[i] * vy[i] + angle_gradient_guard;
            if (want_x) g.grad(x)[i] += -vy[i] / denom * self.grad()[i];
            if (want_y) g.grad(y)[i] += vx[i] / denom * self.grad()[i];
        }
    });

    return {r, a};
}

CartesianPair to_cartesian(const Tensor& rho, const Tensor& phi)
{
    if (rho.shape() != phi.shape())
        throw ShapeError("to_cartesian: rho " + shape_string(rho.shape()) + " and phi " + shape_string(phi.shape()) +
                         " differ");
    CartesianPair out{Tensor(rho.shape()), Tensor(rho.shape())};
    for (std::size_t i = 0; i < rho.size(); ++i) {
        if (rho[i] < 0.0) throw std::domain_error("to_cartesian: negative squared radius " + std::to_string(rho[i]));
        const double r = std::sqrt(rho[i]);
        out.x[i] = r * std::cos(phi[i]);
        out.y[i] = r * std::sin(phi[i]);
    }
    return out;
}

double wrap_angle(double phi)
{
    constexpr double tau = 2.0 * std::numbers::pi;
    double r = std::remainder(phi, tau);
    if (r <= -std::numbers::pi) r += tau;
    return r;
}

}  // namespace tae
