#pragma once

#include "tae/model.hpp"

#include <json.hpp>

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace tae {

/// Kolmogorov-Smirnov distance between the empirical CDF of `angles` and Uniform[-pi, pi].
double ks_uniform(std::span<const double> angles);

/// Pearson correlation of the columns of an S x m matrix. A constant column
/// gets zero correlation with every other column; the diagonal is always 1.
Tensor correlation_matrix(const Tensor& samples);

/// Cartesian latent columns interleaved as x1, y1, ..., xd, yd.
Tensor interleaved_cartesian(const LatentBatch& latent);

struct LatentReport {
    std::size_t samples = 0;
    std::vector<double> ks_phi;     ///< per dimension
    std::vector<double> rho_mean;   ///< per dimension
    std::vector<double> rho_std;    ///< per dimension, population form
    std::vector<std::string> coordinates;  ///< x1, y1, ..., xd, yd
    Tensor correlation;             ///< 2d x 2d, ordered as `coordinates`
};

LatentReport latent_report(const LatentBatch& latent);

std::string format_report(const LatentReport& report);
nlohmann::json report_to_json(const LatentReport& report);
LatentReport report_from_json(const nlohmann::json& j);

/// Header x1,y1,...,xd,yd,r1..rd,phi1..phid,label; r is the radius sqrt(rho).
/// Values are printed with 12 significant digits.
std::string scatter_csv(const LatentBatch& latent, std::span<const int> labels);
void scatter_export(const LatentBatch& latent, std::span<const int> labels, const std::filesystem::path& path);

}  // namespace tae
