#include "tae/morph.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>

namespace tae {

namespace {

constexpr double tau = 2.0 * std::numbers::pi;

void check_same_length(std::span<const double> a, std::span<const double> b)
{
    if (a.size() != b.size() || a.empty())
        throw std::invalid_argument("angle vectors must be non-empty and of equal length");
}

}  // namespace

PathMode parse_path_mode(const std::string& name)
{
    if (name == "two_per_dim") return PathMode::two_per_dim;
    if (name == "full") return PathMode::full;
    throw std::invalid_argument("unknown path mode '" + name + "', expected two_per_dim or full");
}

std::string to_string(PathMode mode)
{
    return mode == PathMode::two_per_dim ? "two_per_dim" : "full";
}

WrapOffset shortest_k(std::span<const double> phi1, std::span<const double> phi2)
{
    check_same_length(phi1, phi2);
    WrapOffset k(phi1.size());
    for (std::size_t i = 0; i < phi1.size(); ++i) {
        const double q = (phi1[i] - phi2[i]) / tau;
        const double lower = std::floor(q);
        // Nearest integer to q; an exact half goes toward zero (the direct path).
        double best = q - lower < 0.5 ? lower : lower + 1.0;
        if (q - lower == 0.5) best = std::abs(lower) <= std::abs(lower + 1.0) ? lower : lower + 1.0;
        k[i] = static_cast<int>(best);
    }
    return k;
}

std::vector<WrapOffset> path_set(std::span<const double> phi1, std::span<const double> phi2, PathMode mode)
{
    check_same_length(phi1, phi2);
    const std::size_t d = phi1.size();
    std::vector<std::vector<int>> choices(d);
    if (mode == PathMode::two_per_dim) {
        const WrapOffset best = shortest_k(phi1, phi2);
        for (std::size_t i = 0; i < d; ++i) {
            const double residual = phi1[i] - phi2[i] - tau * best[i];
            const int longer = residual > 0.0 ? -1 : 1;
            choices[i] = {best[i], best[i] + longer};
        }
    } else {
        for (auto& c : choices) c = {-1, 0, 1};
    }

    std::vector<WrapOffset> paths{WrapOffset{}};
    for (std::size_t i = 0; i < d; ++i) {
        std::vector<WrapOffset> next;
        next.reserve(paths.size() * choices[i].size());
        for (const auto& prefix : paths)
            for (int k : choices[i]) {
                WrapOffset p = prefix;
                p.push_back(k);
                next.push_back(std::move(p));
            }
        paths = std::move(next);
    }
    return paths;
}

PolarPoint polar_point(const LatentPoint& z)
{
    if (z.x.size() != z.y.size()) throw std::invalid_argument("latent point x and y lengths differ");
    PolarPoint p{std::vector<double>(z.x.size()), std::vector<double>(z.x.size())};
    for (std::size_t i = 0; i < z.x.size(); ++i) {
        p.radius[i] = std::sqrt(z.x[i] * z.x[i] + z.y[i] * z.y[i]);
        p.angle[i] = std::atan2(z.y[i], z.x[i]);
    }
    return p;
}

LatentPoint latent_row(const LatentBatch& batch, std::size_t row)
{
    const std::size_t d = batch.x.dim(1);
    if (row >= batch.x.dim(0)) throw std::out_of_range("latent row " + std::to_string(row) + " out of range");
    LatentPoint z{std::vector<double>(d), std::vector<double>(d)};
    for (std::size_t i = 0; i < d; ++i) {
        z.x[i] = batch.x.at(row, i);
        z.y[i] = batch.y.at(row, i);
    }
    return z;
}

std::vector<PolarPoint> path_polar(const MorphPath& path)
{
    if (path.frames < 2) throw std::invalid_argument("a morph path needs at least 2 frames");
    const PolarPoint a = polar_point(path.from);
    const PolarPoint b = polar_point(path.to);
    const std::size_t d = a.radius.size();
    if (b.radius.size() != d || path.k.size() != d)
        throw std::invalid_argument("morph endpoints and wrap offset must share the torus dimension");

    std::vector<PolarPoint> frames;
    frames.reserve(path.frames);
    for (std::size_t s = 0; s < path.frames; ++s) {
        const double t = static_cast<double>(s) / static_cast<double>(path.frames - 1);
        PolarPoint p{std::vector<double>(d), std::vector<double>(d)};
        for (std::size_t i = 0; i < d; ++i) {
            p.radius[i] = (1.0 - t) * a.radius[i] + t * b.radius[i];
            p.angle[i] = (1.0 - t) * a.angle[i] + t * (b.angle[i] + tau * path.k[i]);
        }
        frames.push_back(std::move(p));
    }
    return frames;
}

CartesianPair path_latents(const MorphPath& path)
{
    const auto polar = path_polar(path);
    const std::size_t T = polar.size(), d = polar.front().radius.size();
    CartesianPair out{Tensor({T, d}), Tensor({T, d})};
    for (std::size_t s = 0; s < T; ++s)
        for (std::size_t i = 0; i < d; ++i) {
            if (s == 0) {
                out.x.at(s, i) = path.from.x[i];
                out.y.at(s, i) = path.from.y[i];
                continue;
            }
            out.x.at(s, i) = polar[s].radius[i] * std::cos(polar[s].angle[i]);
            out.y.at(s, i) = polar[s].radius[i] * std::sin(polar[s].angle[i]);
        }
    return out;
}

Tensor interpolate(const TaeModel& model, const MorphPath& path)
{
    const CartesianPair z = path_latents(path);
    return decode(model, z.x, z.y);
}

std::string path_latents_csv(std::span<const MorphPath> paths)
{
    std::string out;
    if (paths.empty()) return out;
    const std::size_t d = paths.front().k.size();
    out = "path,t";
    for (std::size_t i = 1; i <= d; ++i) out += ",r" + std::to_string(i);
    for (std::size_t i = 1; i <= d; ++i) out += ",phi" + std::to_string(i);
    out += "\n";

    char cell[64];
    for (std::size_t p = 0; p < paths.size(); ++p) {
        const auto frames = path_polar(paths[p]);
        for (std::size_t s = 0; s < frames.size(); ++s) {
            const double t = static_cast<double>(s) / static_cast<double>(frames.size() - 1);
            std::snprintf(cell, sizeof(cell), "%zu,%.12g", p, t);
            out += cell;
            for (double r : frames[s].radius) {
                std::snprintf(cell, sizeof(cell), ",%.12g", r);
                out += cell;
            }
            for (double a : frames[s].angle) {
                std::snprintf(cell, sizeof(cell), ",%.12g", wrap_angle(a));
                out += cell;
            }
            out += "\n";
        }
    }
    return out;
}

}  // namespace tae
