#pragma once

#include "tae/model.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace tae {

/// Integer wrap offset per torus dimension; selects which faces of [-pi, pi]^d a segment crosses.
using WrapOffset = std::vector<int>;

enum class PathMode {
    two_per_dim,  ///< per dimension k* and k* - sign(residual) (one extra turn): 2^d paths
    full,         ///< every k in {-1, 0, 1}^d: 3^d paths
};

PathMode parse_path_mode(const std::string& name);
std::string to_string(PathMode mode);

/// k minimizing |phi1_i - phi2_i - 2*pi*k_i| per dimension; at an exact tie the
/// smaller |k| wins, then the smaller k.
WrapOffset shortest_k(std::span<const double> phi1, std::span<const double> phi2);

/// Candidate offsets for multi-path morphing. two_per_dim offers k*_i and
/// k*_i + l_i with l_i = -sign(phi1_i - phi2_i - 2 pi k*_i) (+1 at zero), listing
/// the all-shortest path first; both modes enumerate dimension 1 as the most
/// significant digit.
std::vector<WrapOffset> path_set(std::span<const double> phi1, std::span<const double> phi2, PathMode mode);

/// One latent point: Cartesian heads of a single sample.
struct LatentPoint {
    std::vector<double> x;
    std::vector<double> y;
};

/// Polar form with the radius r = sqrt(x^2 + y^2) (not its square).
struct PolarPoint {
    std::vector<double> radius;
    std::vector<double> angle;
};

PolarPoint polar_point(const LatentPoint& z);
LatentPoint latent_row(const LatentBatch& batch, std::size_t row);

struct MorphPath {
    LatentPoint from;
    LatentPoint to;
    WrapOffset k;
    std::size_t frames = 12;
};

/// Polar coordinates along a path at t = s / (T - 1):
/// r(t) = (1 - t) r1 + t r2 and phi(t) = (1 - t) phi1 + t (phi2 + 2 pi k), angles left unwrapped.
std::vector<PolarPoint> path_polar(const MorphPath& path);

/// Decoder inputs (T x d each) along a path. Row 0 is `from` exactly.
CartesianPair path_latents(const MorphPath& path);

/// Decoded frames, T x 1 x 28 x 28.
Tensor interpolate(const TaeModel& model, const MorphPath& path);

/// CSV `path,t,r1..rd,phi1..phid` with angles wrapped to [-pi, pi].
std::string path_latents_csv(std::span<const MorphPath> paths);

}  // namespace tae
