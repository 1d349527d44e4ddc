#include "tae/diagnostics.hpp"

#include "tae/image_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>

namespace tae {

double ks_uniform(std::span<const double> angles)
{
    if (angles.empty()) throw std::invalid_argument("ks_uniform needs at least one sample");
    std::vector<double> sorted(angles.begin(), angles.end());
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double cdf = std::clamp((sorted[i] + std::numbers::pi) / (2.0 * std::numbers::pi), 0.0, 1.0);
        const double above = static_cast<double>(i + 1) / n - cdf;
        const double below = cdf - static_cast<double>(i) / n;
        worst = std::max({worst, above, below});
    }
    return worst;
}

Tensor correlation_matrix(const Tensor& samples)
{
    if (samples.rank() != 2 || samples.dim(0) < 2)
        throw std::invalid_argument("correlation_matrix needs an S x m matrix with S >= 2, got " +
                                    shape_string(samples.shape()));
    const std::size_t S = samples.dim(0), m = samples.dim(1);
    std::vector<double> mean(m, 0.0), norm(m, 0.0);
    for (std::size_t s = 0; s < S; ++s)
        for (std::size_t j = 0; j < m; ++j) mean[j] += samples.at(s, j);
    for (double& v : mean) v /= static_cast<double>(S);

    Tensor cov({m, m});
    for (std::size_t s = 0; s < S; ++s)
        for (std::size_t a = 0; a < m; ++a) {
            const double da = samples.at(s, a) - mean[a];
            for (std::size_t b = a; b < m; ++b) cov.at(a, b) += da * (samples.at(s, b) - mean[b]);
        }
    for (std::size_t j = 0; j < m; ++j) norm[j] = std::sqrt(cov.at(j, j));

    Tensor corr({m, m});
    for (std::size_t a = 0; a < m; ++a) {
        corr.at(a, a) = 1.0;
        for (std::size_t b = a + 1; b < m; ++b) {
            double r = 0.0;
            if (norm[a] > 0.0 && norm[b] > 0.0) r = std::clamp(cov.at(a, b) / (norm[a] * norm[b]), -1.0, 1.0);
            corr.at(a, b) = r;
            corr.at(b, a) = r;
        }
    }
    return corr;
}

Tensor interleaved_cartesian(const LatentBatch& latent)
{
    const std::size_t S = latent.x.dim(0), d = latent.x.dim(1);
    Tensor out({S, 2 * d});
    for (std::size_t s = 0; s < S; ++s)
        for (std::size_t i = 0; i < d; ++i) {
            out.at(s, 2 * i) = latent.x.at(s, i);
            out.at(s, 2 * i + 1) = latent.y.at(s, i);
        }
    return out;
}

LatentReport latent_report(const LatentBatch& latent)
{
    const std::size_t S = latent.phi.dim(0), d = latent.phi.dim(1);
    LatentReport r;
    r.samples = S;
    for (std::size_t i = 0; i < d; ++i) {
        std::vector<double> phi(S), rho(S);
        for (std::size_t s = 0; s < S; ++s) {
            phi[s] = latent.phi.at(s, i);
            rho[s] = latent.rho.at(s, i);
        }
        r.ks_phi.push_back(ks_uniform(phi));
        double mean = 0.0;
        for (double v : rho) mean += v;
        mean /= static_cast<double>(S);
        double var = 0.0;
        for (double v : rho) var += (v - mean) * (v - mean);
        r.rho_mean.push_back(mean);
        r.rho_std.push_back(std::sqrt(var / static_cast<double>(S)));
        r.coordinates.push_back("x" + std::to_string(i + 1));
        r.coordinates.push_back("y" + std::to_string(i + 1));
    }
    r.correlation = S >= 2 ? correlation_matrix(interleaved_cartesian(latent)) : Tensor({2 * d, 2 * d});
    return r;
}

std::string format_report(const LatentReport& r)
{
    std::string out;
    char line[256];
    std::snprintf(line, sizeof(line), "samples: %zu\n\n%-6s %10s %10s %10s\n", r.samples, "dim", "KS(phi)", "mean(rho)",
                  "std(rho)");
    out += line;
    for (std::size_t i = 0; i < r.ks_phi.size(); ++i) {
        std::snprintf(line, sizeof(line), "%-6zu %10.4f %10.4f %10.4f\n", i + 1, r.ks_phi[i], r.rho_mean[i], r.rho_std[i]);
        out += line;
    }
    out += "\ncorrelation (Cartesian coordinates)\n      ";
    for (const auto& name : r.coordinates) {
        std::snprintf(line, sizeof(line), " %7s", name.c_str());
        out += line;
    }
    out += "\n";
    const std::size_t m = r.coordinates.size();
    for (std::size_t a = 0; a < m; ++a) {
        std::snprintf(line, sizeof(line), "%-6s", r.coordinates[a].c_str());
        out += line;
        for (std::size_t b = 0; b < m; ++b) {
            std::snprintf(line, sizeof(line), " %7.3f", r.correlation.at(a, b));
            out += line;
        }
        out += "\n";
    }
    return out;
}

nlohmann::json report_to_json(const LatentReport& r)
{
    const std::size_t m = r.coordinates.size();
    std::vector<std::vector<double>> corr(m, std::vector<double>(m));
    for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = 0; b < m; ++b) corr[a][b] = r.correlation.at(a, b);
    return {{"samples", r.samples},     {"ks_phi", r.ks_phi},           {"rho_mean", r.rho_mean},
            {"rho_std", r.rho_std},     {"coordinates", r.coordinates}, {"correlation", corr}};
}

LatentReport report_from_json(const nlohmann::json& j)
{
    LatentReport r;
    j.at("samples").get_to(r.samples);
    j.at("ks_phi").get_to(r.ks_phi);
    j.at("rho_mean").get_to(r.rho_mean);
    j.at("rho_std").get_to(r.rho_std);
    j.at("coordinates").get_to(r.coordinates);
    const auto corr = j.at("correlation").get<std::vector<std::vector<double>>>();
    const std::size_t m = r.coordinates.size();
    if (corr.size() != m) throw std::invalid_argument("report correlation size does not match coordinates");
    r.correlation = Tensor({m, m});
    for (std::size_t a = 0; a < m; ++a) {
        if (corr[a].size() != m) throw std::invalid_argument("report correlation is not square");
        for (std::size_t b = 0; b < m; ++b) r.correlation.at(a, b) = corr[a][b];
    }
    return r;
}

std::string scatter_csv(const LatentBatch& latent, std::span<const int> labels)
{
    const std::size_t S = latent.x.dim(0), d = latent.x.dim(1);
    if (labels.size() != S) throw std::invalid_argument("scatter_csv: one label per sample required");
    std::string out;
    for (std::size_t i = 1; i <= d; ++i) out += "x" + std::to_string(i) + ",y" + std::to_string(i) + ",";
    for (std::size_t i = 1; i <= d; ++i) out += "r" + std::to_string(i) + ",";
    for (std::size_t i = 1; i <= d; ++i) out += "phi" + std::to_string(i) + ",";
    out += "label\n";

    char cell[40];
    for (std::size_t s = 0; s < S; ++s) {
        for (std::size_t i = 0; i < d; ++i) {
            std::snprintf(cell, sizeof(cell), "%.12g,%.12g,", latent.x.at(s, i), latent.y.at(s, i));
            out += cell;
        }
        for (std::size_t i = 0; i < d; ++i) {
            std::snprintf(cell, sizeof(cell), "%.12g,", std::sqrt(latent.rho.at(s, i)));
            out += cell;
        }
        for (std::size_t i = 0; i < d; ++i) {
            std::snprintf(cell, sizeof(cell), "%.12g,", latent.phi.at(s, i));
            out += cell;
        }
        out += std::to_string(labels[s]) + "\n";
    }
    return out;
}

void scatter_export(const LatentBatch& latent, std::span<const int> labels, const std::filesystem::path& path)
{
    write_text(path, scatter_csv(latent, labels));
}

}  // namespace tae
