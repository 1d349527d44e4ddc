#pragma once

#include "tae/graph.hpp"

namespace tae {

/// Guard added to x^2 + y^2 in the angle gradient so the origin yields a finite value.
inline constexpr double angle_gradient_guard = 1e-8;

struct PolarVars {
    Var rho;  ///< squared radius x^2 + y^2
    Var phi;  ///< atan2(y, x) in [-pi, pi]
};

/// Differentiable Cartesian -> polar map on S x d matrices.
PolarVars to_polar(Graph& g, Var x, Var y);

struct CartesianPair {
    Tensor x;
    Tensor y;
};

/// x = sqrt(rho) cos(phi), y = sqrt(rho) sin(phi). Throws std::domain_error on negative rho.
CartesianPair to_cartesian(const Tensor& rho, const Tensor& phi);

/// Reduces an angle modulo 2*pi into [-pi, pi]; odd multiples of pi map to +pi.
double wrap_angle(double phi);

}  // namespace tae
